#include "sgns/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgns {

std::string scheme_name(Scheme s) { return s == Scheme::EulerMaruyama ? "euler_maruyama" : "heun"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "euler_maruyama" || name == "em") return Scheme::EulerMaruyama;
    if (name == "heun") return Scheme::Heun;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected euler_maruyama or heun)");
}

GalerkinSystem make_system(const Basis& basis, const ConvectionTensor& b, NoiseSpec noise, double nu) {
    if (!(nu >= 0.0)) throw std::invalid_argument("viscosity must be non-negative");
    if (static_cast<std::size_t>(noise.additive.eta.rows()) != basis.size() && noise.additive.eta.size() != 0)
        throw std::invalid_argument("additive noise rows do not match the basis size");
    if (noise.additive.eta.size() == 0) noise.additive.eta = Eigen::MatrixXd::Zero(basis.size(), noise.brownian_modes);
    if (static_cast<std::size_t>(noise.additive.eta.cols()) != noise.brownian_modes)
        throw std::invalid_argument("additive noise columns do not match the Brownian mode count");
    for (std::size_t f = 0; f < noise.transport.zeta.size(); ++f) {
        if (static_cast<std::size_t>(noise.transport.zeta[f].rows()) != basis.size())
            throw std::invalid_argument("transport matrix does not match the basis size");
        if (noise.transport.fields[f].ell >= noise.brownian_modes)
            throw std::invalid_argument("transport field refers to a Brownian mode beyond K");
    }
    GalerkinSystem s{basis, b, basis.laplacian_eigenvalues(), std::move(noise), nu, {}, 0.0, 0.0};
    s.corr = ito_correction(s.noise.transport, basis.size());
    s.b_norm = b.frobenius_norm();
    s.eta_hs = hs_norm(s.noise.additive);
    return s;
}

GalerkinSystem make_system(const Basis& basis, NoiseSpec noise, double nu) {
    return make_system(basis, convection_tensor(basis), std::move(noise), nu);
}

GalerkinSystem with_viscosity(const GalerkinSystem& sys, double nu) {
    if (!(nu >= 0.0)) throw std::invalid_argument("viscosity must be non-negative");
    GalerkinSystem s = sys;
    s.nu = nu;
    return s;
}

Eigen::MatrixXd GalerkinSystem::dissipation() const {
    Eigen::MatrixXd d = corr;
    d.diagonal() += nu * lap;
    return d;
}

Stepper::Stepper(const GalerkinSystem& sys, Scheme scheme) : sys_(sys), scheme_(scheme) {
    const auto n = static_cast<Eigen::Index>(sys.N());
    conv_.setZero(n);
    f0_.setZero(n);
    f1_.setZero(n);
    pred_.setZero(n);
    conv1_.setZero(n);
    tmp_.setZero(n);
}

void Stepper::strat_drift(const Eigen::VectorXd& a, Eigen::VectorXd& out, Eigen::VectorXd& conv) {
    sys_.b.contract(a, conv);
    out = -conv - sys_.nu * sys_.lap.cwiseProduct(a);
}

void Stepper::add_noise(const Eigen::VectorXd& a, const double* dW, double scale, Eigen::VectorXd& out) {
    const auto& eta = sys_.noise.additive.eta;
    for (Eigen::Index l = 0; l < eta.cols(); ++l)
        if (dW[l] != 0.0) out.noalias() += dW[l] * eta.col(l);
    const auto& tr = sys_.noise.transport;
    for (std::size_t f = 0; f < tr.zeta.size(); ++f) {
        double w = dW[tr.fields[f].ell];
        if (w == 0.0) continue;
        out.noalias() += (scale * w) * (tr.zeta[f] * a);
    }
}

void Stepper::step(Eigen::VectorXd& a, const double* dW, double dt) {
    strat_drift(a, f0_, conv_);
    if (scheme_ == Scheme::EulerMaruyama) {
        tmp_ = a + dt * f0_;
        if (sys_.has_transport()) tmp_.noalias() -= dt * (sys_.corr * a);
        add_noise(a, dW, 1.0, tmp_);
        a.swap(tmp_);
        return;
    }
    pred_ = a + dt * f0_;
    add_noise(a, dW, 1.0, pred_);
    strat_drift(pred_, f1_, conv1_);
    tmp_ = a + (0.5 * dt) * (f0_ + f1_);
    pred_ += a;  // a + a_pred, for the averaged transport term
    const auto& eta = sys_.noise.additive.eta;
    for (Eigen::Index l = 0; l < eta.cols(); ++l)
        if (dW[l] != 0.0) tmp_.noalias() += dW[l] * eta.col(l);
    const auto& tr = sys_.noise.transport;
    for (std::size_t f = 0; f < tr.zeta.size(); ++f) {
        double w = dW[tr.fields[f].ell];
        if (w == 0.0) continue;
        tmp_.noalias() += (0.5 * w) * (tr.zeta[f] * pred_);
    }
    a.swap(tmp_);
}

namespace {

void require_finite(const Eigen::VectorXd& a, std::size_t n) {
    if (static_cast<std::size_t>(a.size()) != n) throw std::invalid_argument("state has the wrong length");
    if (!a.allFinite()) throw std::invalid_argument("state contains non-finite entries");
}

}  // namespace

Eigen::VectorXd drift(const GalerkinSystem& sys, const Eigen::VectorXd& a) {
    require_finite(a, sys.N());
    Eigen::VectorXd out = -sys.b.contract(a) - sys.nu * sys.lap.cwiseProduct(a);
    if (sys.has_transport()) out -= sys.corr * a;
    return out;
}

Eigen::MatrixXd diffusion(const GalerkinSystem& sys, const Eigen::VectorXd& a) {
    require_finite(a, sys.N());
    Eigen::MatrixXd g = sys.noise.additive.eta;
    const auto& tr = sys.noise.transport;
    for (std::size_t f = 0; f < tr.zeta.size(); ++f) g.col(tr.fields[f].ell) += tr.zeta[f] * a;
    return g;
}

namespace {

Eigen::VectorXd one_step(const GalerkinSystem& sys, const Eigen::VectorXd& a, const Eigen::VectorXd& dW,
                         double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
    require_finite(a, sys.N());
    if (static_cast<std::size_t>(dW.size()) != sys.K())
        throw std::invalid_argument("Brownian increment has the wrong length");
    Stepper st(sys, scheme);
    Eigen::VectorXd out = a;
    st.step(out, dW.data(), dt);
    return out;
}

}  // namespace

Eigen::VectorXd step_euler_maruyama(const GalerkinSystem& sys, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& dW, double dt) {
    return one_step(sys, a, dW, dt, Scheme::EulerMaruyama);
}

Eigen::VectorXd step_heun_stratonovich(const GalerkinSystem& sys, const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& dW, double dt) {
    return one_step(sys, a, dW, dt, Scheme::Heun);
}

double kinetic_energy(const Eigen::VectorXd& a) { return 0.5 * a.squaredNorm(); }

double gradient_energy(const Eigen::VectorXd& lap, const Eigen::VectorXd& a) {
    return (lap.array() * a.array().square()).sum();
}

double guard_constant(const GalerkinSystem& sys) { return sys.nu == 0.0 ? 0.25 : 0.5; }

double step_bound(const GalerkinSystem& sys, const Eigen::VectorXd& a, double c) {
    double denom = sys.nu * sys.basis.max_k2() + a.norm() * sys.b_norm;
    return denom > 0.0 ? c / denom : std::numeric_limits<double>::infinity();
}

bool Trajectory::every_step() const {
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (steps[i] != i) return false;
    return true;
}

std::size_t Trajectory::index_of_time(double t) const {
    const double dt = path.dt();
    double x = t / dt;
    double r = std::round(x);
    if (r < 0 || std::abs(x - r) > 1e-6)
        throw std::invalid_argument("time " + std::to_string(t) + " is off the trajectory grid");
    auto idx = index_of_step(static_cast<std::size_t>(r));
    if (!idx) throw std::invalid_argument("time " + std::to_string(t) + " is not a saved trajectory time");
    return *idx;
}

std::optional<std::size_t> Trajectory::index_of_step(std::size_t n) const {
    auto it = std::lower_bound(steps.begin(), steps.end(), n);
    if (it == steps.end() || *it != n) return std::nullopt;
    return static_cast<std::size_t>(it - steps.begin());
}

Trajectory integrate(const GalerkinSystem& sys, const Eigen::VectorXd& a0, const PathSpec& path,
                     Scheme scheme, const IntegrateOptions& opt) {
    require_finite(a0, sys.N());
    if (path.modes != sys.K())
        throw std::invalid_argument("Brownian path has " + std::to_string(path.modes) +
                                    " modes but the system has " + std::to_string(sys.K()));
    const double dt = path.dt();
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");

    Trajectory tr;
    tr.path = path;
    tr.scheme = scheme;
    tr.nu = sys.nu;
    tr.guard.constant = opt.guard_c > 0.0 ? opt.guard_c : guard_constant(sys);
    tr.guard.min_bound = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> extra = opt.extra_saves;
    std::sort(extra.begin(), extra.end());
    auto extra_it = extra.begin();

    const auto& eta = sys.noise.additive.eta;
    const double half_hs = 0.5 * sys.eta_hs;
    const Eigen::Index n = static_cast<Eigen::Index>(sys.N());

    Eigen::VectorXd a = a0;
    double viscous = 0.0, stochastic = 0.0, grad_int = 0.0;
    Eigen::VectorXd int_a, int_b;
    if (opt.keep_integrals) {
        int_a.setZero(n);
        int_b.setZero(n);
    }

    auto save = [&](std::size_t step) {
        double t = static_cast<double>(step) * dt;
        double ke = kinetic_energy(a);
        tr.steps.push_back(step);
        tr.times.push_back(t);
        tr.states.push_back(a);
        tr.energy.push_back(ke);
        tr.grad_energy.push_back(gradient_energy(sys.lap, a));
        tr.grad_integral.push_back(grad_int);
        tr.record.E.push_back(ke);
        tr.record.kinetic.push_back(ke);
        tr.record.viscous.push_back(viscous);
        tr.record.stochastic.push_back(stochastic);
        tr.record.hs.push_back(half_hs * t);
        if (opt.keep_integrals) {
            tr.int_state.push_back(int_a);
            tr.int_convection.push_back(int_b);
        }
    };
    auto wanted = [&](std::size_t step) {
        while (extra_it != extra.end() && *extra_it < step) ++extra_it;
        bool hit = extra_it != extra.end() && *extra_it == step;
        return hit || step == path.n_steps || (opt.save_stride > 0 && step % opt.save_stride == 0);
    };

    tr.sup_kinetic = kinetic_energy(a);
    save(0);

    BrownianPath bp(path);
    Stepper stepper(sys, scheme);
    for (std::size_t step = 0; step < path.n_steps; ++step) {
        if (opt.guard != GuardPolicy::Off) {
            double bound = step_bound(sys, a, tr.guard.constant);
            tr.guard.min_bound = std::min(tr.guard.min_bound, bound);
            if (dt > bound && !tr.guard.violated) {
                tr.guard.violated = true;
                tr.guard.first_violation_step = step;
                if (opt.guard == GuardPolicy::Enforce && step == 0)
                    throw std::domain_error("step size " + std::to_string(dt) + " exceeds the stability bound " +
                                            std::to_string(bound));
            }
        }
        const double* dw = bp.increment(step);
        const double ge = gradient_energy(sys.lap, a);
        double sdot = 0.0;
        for (Eigen::Index l = 0; l < eta.cols(); ++l)
            if (dw[l] != 0.0) sdot += a.dot(eta.col(l)) * dw[l];
        if (opt.keep_integrals) int_a += dt * a;

        stepper.step(a, dw, dt);

        viscous += dt * sys.nu * ge;
        grad_int += dt * ge;
        stochastic += sdot;
        if (opt.keep_integrals) int_b += dt * stepper.convection();

        if (!a.allFinite() || a.lpNorm<Eigen::Infinity>() > 1e150) {
            tr.blew_up = true;
            tr.blowup_time = static_cast<double>(step + 1) * dt;
            break;
        }
        tr.sup_kinetic = std::max(tr.sup_kinetic, kinetic_energy(a));
        if (wanted(step + 1)) save(step + 1);
    }
    return tr;
}

}  // namespace sgns
