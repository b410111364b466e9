#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgns/basis.hpp"
#include "sgns/ensemble.hpp"
#include "sgns/grid.hpp"
#include "sgns/sde.hpp"

namespace sgns {

// [E(t) - E(s)] + nu int |grad u|^2 - int <u, sigma1 dW> - 1/2 (t - s) |sigma1|^2_HS
// from the cumulative energy record; s and t must be saved times.
double energy_residual(const Trajectory& tr, const GalerkinSystem& sys, double s, double t);
double energy_residual_between(const Trajectory& tr, const GalerkinSystem& sys, std::size_t is, std::size_t it);

// phi(t) = phi0 + int A ds + int B dW, all in basis coordinates. A is
// piecewise constant: drift[q] applies on [segment_starts[q], next start).
struct TestProcess {
    std::string name;
    char kind = 'a';
    Eigen::VectorXd phi0;
    std::vector<double> segment_starts;
    std::vector<Eigen::VectorXd> drift;
    Eigen::MatrixXd B;  // N x K, may be empty

    const Eigen::VectorXd* drift_at(double t) const;
    bool is_static() const;
    TestProcess scaled(double alpha) const;
};

TestProcess zero_test_process(std::size_t n);

// Values phi_n at every step 0..n_steps of the given path.
std::vector<Eigen::VectorXd> test_process_values(const TestProcess& phi, const PathSpec& path);

// Ten processes spanning static fields, deterministic time-modulated fields
// (B = 0) and martingale-type processes with constant B on the additive
// noise modes.
std::vector<TestProcess> test_process_library(const GalerkinSystem& sys, double T, std::uint64_t seed);

struct GapBreakdown {
    double energy = 0.0;       // energy_residual(s, t)
    double linear = 0.0;       // every term linear in phi
    double weight_term = 0.0;  // int w(phi) (1/2 |u|^2 - E)
    double max_weight = 0.0;   // max over the interval of 2 |(grad phi)_{sym,-}|_inf
    double total = 0.0;
};

// LHS - RHS of the energy-variational inequality on [s, t]; requires a
// trajectory saved at every step.
GapBreakdown energy_variational_gap_detail(const Trajectory& tr, const TestProcess& phi,
                                           const GalerkinSystem& sys, double s, double t);
double energy_variational_gap(const Trajectory& tr, const TestProcess& phi, const GalerkinSystem& sys, double s,
                              double t);

// Index map of coarse modes inside the fine basis (matching k, polarization, phase).
std::vector<std::size_t> embed_basis(const Basis& coarse, const Basis& fine);

struct RelativeEnergySeries {
    std::vector<double> times;
    std::vector<double> relative_energy;
    std::vector<double> rate;   // 2 |(grad u~)_{sym,-}|_inf
    std::vector<double> bound;  // RE(s) exp(int_s^t rate)
};

RelativeEnergySeries relative_energy(const Trajectory& coarse, const Basis& coarse_basis, const Trajectory& strong,
                                     const Basis& strong_basis, double s, double t);

struct DefectField {
    int dim = 2;
    int M = 0;
    std::vector<Eigen::MatrixXd> R;  // per grid point, d x d
    double trace_integral = 0.0;     // 1/2 int tr R dx
    double mean_energy = 0.0;        // E^ = mean 1/2 |u|^2
    double mean_field_energy = 0.0;  // 1/2 |u_bar|^2
    double min_eigenvalue = 0.0;
};

// Sample-level defect from grid samples (G x d per member) with cell volume h.
DefectField reynolds_defect_samples(int dim, int M, const std::vector<Eigen::MatrixXd>& samples, double cell_volume);
DefectField reynolds_defect(const std::vector<Eigen::VectorXd>& states, const Basis& basis, int grid_M);
DefectField reynolds_defect(const Ensemble& ens, const Basis& basis, double t, int grid_M);

// Rejects mean-carrying or compressible phi and phi with no solenoidal content.
Eigen::VectorXd solenoidal_test_field(const Basis& basis, const FourierField& phi);

// Ensemble mean of  -(u(t) - u(0), phi) + int [ -(phi, B(u,u)) - (u, D phi) ] ds
// with the martingale term averaged out; needs keep_integrals.
Estimate dissipative_weak_residual(const Ensemble& ens, const GalerkinSystem& sys, const FourierField& phi, double t);

}  // namespace sgns
