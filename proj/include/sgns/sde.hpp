#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgns/basis.hpp"
#include "sgns/brownian.hpp"
#include "sgns/noise.hpp"
#include "sgns/triad.hpp"

namespace sgns {

enum class Scheme { EulerMaruyama, Heun };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct GalerkinSystem {
    Basis basis;
    ConvectionTensor b;
    Eigen::VectorXd lap;
    NoiseSpec noise;
    double nu = 0.0;
    Eigen::MatrixXd corr;  // 1/2 sum zeta^T zeta
    double b_norm = 0.0;   // Frobenius norm of b, used as an operator-norm bound
    double eta_hs = 0.0;   // squared Hilbert-Schmidt norm of the additive part

    std::size_t N() const { return basis.size(); }
    std::size_t K() const { return noise.brownian_modes; }
    bool has_transport() const { return !noise.transport.zeta.empty(); }
    Eigen::MatrixXd dissipation() const;
};

GalerkinSystem make_system(const Basis& basis, NoiseSpec noise, double nu);
GalerkinSystem make_system(const Basis& basis, const ConvectionTensor& b, NoiseSpec noise, double nu);
GalerkinSystem with_viscosity(const GalerkinSystem& sys, double nu);

// -B(a,a) - D a with D = nu diag|k|^2 + corr (Ito form).
Eigen::VectorXd drift(const GalerkinSystem& sys, const Eigen::VectorXd& a);
// Column l is eta_l + zeta^(l) a.
Eigen::MatrixXd diffusion(const GalerkinSystem& sys, const Eigen::VectorXd& a);

Eigen::VectorXd step_euler_maruyama(const GalerkinSystem& sys, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& dW, double dt);
Eigen::VectorXd step_heun_stratonovich(const GalerkinSystem& sys, const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& dW, double dt);

// Allocation-free stepping kernel shared by the public step functions and
// the integrator. After step(), convection() holds B(a,a) at the left point.
class Stepper {
public:
    Stepper(const GalerkinSystem& sys, Scheme scheme);
    void step(Eigen::VectorXd& a, const double* dW, double dt);
    const Eigen::VectorXd& convection() const { return conv_; }

private:
    void strat_drift(const Eigen::VectorXd& a, Eigen::VectorXd& out, Eigen::VectorXd& conv);
    void add_noise(const Eigen::VectorXd& a, const double* dW, double scale, Eigen::VectorXd& out);

    const GalerkinSystem& sys_;
    Scheme scheme_;
    Eigen::VectorXd conv_, f0_, f1_, pred_, conv1_, tmp_;
};

double kinetic_energy(const Eigen::VectorXd& a);
double gradient_energy(const Eigen::VectorXd& lap, const Eigen::VectorXd& a);

enum class GuardPolicy { Enforce, Report, Off };

struct GuardReport {
    double constant = 0.0;
    double min_bound = 0.0;
    bool violated = false;
    std::size_t first_violation_step = 0;
};

// c / (nu |k|^2_max + |a| |b|), c = 0.5, tightened to 0.25 for nu = 0.
double guard_constant(const GalerkinSystem& sys);
double step_bound(const GalerkinSystem& sys, const Eigen::VectorXd& a, double c);

struct IntegrateOptions {
    std::size_t save_stride = 1;            // 0 keeps only the endpoints
    std::vector<std::size_t> extra_saves;   // additional step indices to keep
    GuardPolicy guard = GuardPolicy::Enforce;
    double guard_c = 0.0;                   // 0 selects guard_constant()
    bool keep_integrals = false;            // cumulative int a dt and int B(a,a) dt
};

// Cumulative quantities at each saved time. E is the auxiliary energy, equal
// to the kinetic energy for simulated Galerkin data.
struct EnergyRecord {
    std::vector<double> E;
    std::vector<double> kinetic;
    std::vector<double> viscous;     // nu int |grad u|^2
    std::vector<double> stochastic;  // int <u, sigma1 dW>, left-point
    std::vector<double> hs;          // 1/2 t |sigma1|^2_HS
};

struct Trajectory {
    PathSpec path;
    Scheme scheme = Scheme::EulerMaruyama;
    double nu = 0.0;

    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> energy;
    std::vector<double> grad_energy;
    std::vector<double> grad_integral;  // int |grad u|^2
    EnergyRecord record;

    std::vector<Eigen::VectorXd> int_state;
    std::vector<Eigen::VectorXd> int_convection;

    double sup_kinetic = 0.0;
    bool blew_up = false;
    double blowup_time = 0.0;
    GuardReport guard;

    std::size_t size() const { return times.size(); }
    double dt() const { return path.dt(); }
    bool every_step() const;
    // Saved index for time t; throws if t is not a saved grid time.
    std::size_t index_of_time(double t) const;
    std::optional<std::size_t> index_of_step(std::size_t n) const;
};

Trajectory integrate(const GalerkinSystem& sys, const Eigen::VectorXd& a0, const PathSpec& path,
                     Scheme scheme, const IntegrateOptions& opt = {});

}  // namespace sgns
