#include "sgns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgns {

double energy_residual_between(const Trajectory& tr, const GalerkinSystem& sys, std::size_t is, std::size_t it) {
    if (is > it || it >= tr.size()) throw std::invalid_argument("energy_residual: interval indices out of order");
    const auto& r = tr.record;
    const double span = static_cast<double>(tr.steps[it] - tr.steps[is]) * tr.dt();
    return (r.E[it] - r.E[is]) + (r.viscous[it] - r.viscous[is]) - (r.stochastic[it] - r.stochastic[is]) -
           0.5 * span * sys.eta_hs;
}

double energy_residual(const Trajectory& tr, const GalerkinSystem& sys, double s, double t) {
    if (s > t) throw std::invalid_argument("energy_residual: s must not exceed t");
    return energy_residual_between(tr, sys, tr.index_of_time(s), tr.index_of_time(t));
}

const Eigen::VectorXd* TestProcess::drift_at(double t) const {
    const Eigen::VectorXd* cur = nullptr;
    for (std::size_t q = 0; q < segment_starts.size(); ++q)
        if (segment_starts[q] <= t) cur = &drift[q];
    return cur;
}

bool TestProcess::is_static() const {
    for (const auto& d : drift)
        if (d.squaredNorm() != 0.0) return false;
    return B.size() == 0 || B.squaredNorm() == 0.0;
}

TestProcess TestProcess::scaled(double alpha) const {
    TestProcess p = *this;
    p.phi0 *= alpha;
    for (auto& d : p.drift) d *= alpha;
    p.B *= alpha;
    return p;
}

TestProcess zero_test_process(std::size_t n) {
    TestProcess p;
    p.name = "zero";
    p.phi0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    return p;
}

std::vector<Eigen::VectorXd> test_process_values(const TestProcess& phi, const PathSpec& path) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(path.n_steps + 1);
    out.push_back(phi.phi0);
    const bool has_b = phi.B.size() != 0 && phi.B.squaredNorm() != 0.0;
    if (has_b && static_cast<std::size_t>(phi.B.cols()) != path.modes)
        throw std::invalid_argument("test process diffusion does not match the Brownian mode count");
    BrownianPath bp(path);
    const double dt = path.dt();
    Eigen::VectorXd f = phi.phi0;
    for (std::size_t n = 0; n < path.n_steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        if (const auto* A = phi.drift_at(t)) f += dt * (*A);
        if (has_b) {
            const double* dw = bp.increment(n);
            for (Eigen::Index l = 0; l < phi.B.cols(); ++l) f += dw[l] * phi.B.col(l);
        }
        out.push_back(f);
    }
    return out;
}

GapBreakdown energy_variational_gap_detail(const Trajectory& tr, const TestProcess& phi, const GalerkinSystem& sys,
                                           double s, double t) {
    if (s > t) throw std::invalid_argument("energy_variational_gap: s must not exceed t");
    if (!tr.every_step()) throw std::invalid_argument("energy_variational_gap needs a trajectory saved at every step");
    if (static_cast<std::size_t>(phi.phi0.size()) != sys.N())
        throw std::invalid_argument("test process dimension does not match the system");
    for (const auto& d : phi.drift)
        if (static_cast<std::size_t>(d.size()) != sys.N())
            throw std::invalid_argument("test process drift dimension does not match the system");
    if (phi.B.size() != 0 && (static_cast<std::size_t>(phi.B.rows()) != sys.N() ||
                              static_cast<std::size_t>(phi.B.cols()) != sys.K()))
        throw std::invalid_argument("test process diffusion must be N x K");

    const std::size_t is = tr.index_of_time(s), it = tr.index_of_time(t);
    GapBreakdown g;
    g.energy = energy_residual_between(tr, sys, is, it);

    PathSpec upto = tr.path;
    upto.n_steps = it;
    auto fv = test_process_values(phi, upto);

    const double dt = tr.dt();
    const auto& eta = sys.noise.additive.eta;
    const auto& zt = sys.noise.transport;
    const bool has_b = phi.B.size() != 0 && phi.B.squaredNorm() != 0.0;
    NegPartWeight weight(sys.basis);
    const bool stat = phi.is_static();
    double w_static = stat ? weight(phi.phi0) : 0.0;
    g.max_weight = w_static;

    BrownianPath bp(tr.path);
    Eigen::VectorXd conv(sys.N()), zf, zb;
    double lin_dt = 0.0, lin_dw = 0.0, wterm = 0.0;
    for (std::size_t n = is; n < it; ++n) {
        const Eigen::VectorXd& a = tr.states[n];
        const Eigen::VectorXd& f = fv[n];
        const double* dw = bp.increment(n);
        const double tn = static_cast<double>(n) * dt;

        sys.b.contract(a, conv);
        double term = -sys.nu * (a.cwiseProduct(sys.lap)).dot(f) - f.dot(conv);
        if (const auto* A = phi.drift_at(tn)) term += a.dot(*A);

        double w = stat ? w_static : weight(f);
        g.max_weight = std::max(g.max_weight, w);
        wterm += dt * w * (tr.record.kinetic[n] - tr.record.E[n]);

        double sto = 0.0;
        for (Eigen::Index l = 0; l < eta.cols(); ++l) {
            double bl_eta = has_b ? eta.col(l).dot(phi.B.col(l)) : 0.0;
            term += bl_eta;
            double c = -f.dot(eta.col(l));
            if (has_b) c -= a.dot(phi.B.col(l));
            sto += c * dw[l];
        }
        for (std::size_t q = 0; q < zt.zeta.size(); ++q) {
            const auto l = static_cast<Eigen::Index>(zt.fields[q].ell);
            zf = zt.zeta[q] * f;
            term += 0.5 * a.dot(zt.zeta[q] * zf);
            sto += a.dot(zf) * dw[l];
            if (has_b) {
                zb = zt.zeta[q] * phi.B.col(l);
                term -= a.dot(zb);
            }
        }
        lin_dt += dt * term;
        lin_dw += sto;
    }
    const double boundary = -(tr.states[it].dot(fv[it]) - tr.states[is].dot(fv[is]));
    g.linear = boundary + lin_dt - lin_dw;
    g.weight_term = wterm;
    g.total = g.energy + (g.linear + g.weight_term);
    return g;
}

double energy_variational_gap(const Trajectory& tr, const TestProcess& phi, const GalerkinSystem& sys, double s,
                              double t) {
    return energy_variational_gap_detail(tr, phi, sys, s, t).total;
}

std::vector<std::size_t> embed_basis(const Basis& coarse, const Basis& fine) {
    if (coarse.dim() != fine.dim()) throw std::invalid_argument("embedding needs bases of the same dimension");
    if (coarse.cutoff() > fine.cutoff()) throw std::invalid_argument("coarse cutoff exceeds the fine cutoff");
    std::vector<std::size_t> map(coarse.size());
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const Mode& m = coarse.mode(i);
        auto j = fine.find(m.k, m.pol, m.phase);
        if (!j) throw std::logic_error("coarse mode missing from the fine basis");
        map[i] = *j;
    }
    return map;
}

RelativeEnergySeries relative_energy(const Trajectory& coarse, const Basis& coarse_basis, const Trajectory& strong,
                                     const Basis& strong_basis, double s, double t) {
    if (!(coarse.path == strong.path))
        throw std::invalid_argument("relative_energy: trajectories are not driven by the same Brownian path");
    if (coarse.steps != strong.steps)
        throw std::invalid_argument("relative_energy: trajectories do not share a time grid");
    if (s > t) throw std::invalid_argument("relative_energy: s must not exceed t");
    auto map = embed_basis(coarse_basis, strong_basis);
    NegPartWeight weight(strong_basis);

    const std::size_t is = coarse.index_of_time(s), it = coarse.index_of_time(t);
    RelativeEnergySeries out;
    double integral = 0.0, re0 = 0.0;
    for (std::size_t n = is; n <= it; ++n) {
        const Eigen::VectorXd& a = coarse.states[n];
        const Eigen::VectorXd& u = strong.states[n];
        double cross = 0.0;
        for (std::size_t i = 0; i < map.size(); ++i) cross += a[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(map[i])];
        double re = coarse.record.E[n] - cross + 0.5 * u.squaredNorm();
        if (n == is) re0 = re;
        double rate = weight(u);
        out.times.push_back(coarse.times[n]);
        out.relative_energy.push_back(re);
        out.rate.push_back(rate);
        out.bound.push_back(re0 * std::exp(integral));
        if (n < it) integral += rate * (coarse.times[n + 1] - coarse.times[n]);
    }
    return out;
}

DefectField reynolds_defect_samples(int dim, int M, const std::vector<Eigen::MatrixXd>& samples, double cell_volume) {
    if (samples.size() < 2) throw std::invalid_argument("Reynolds defect needs at least two ensemble members");
    const Eigen::Index G = samples.front().rows();
    for (const auto& s : samples)
        if (s.rows() != G || s.cols() != dim) throw std::invalid_argument("defect samples have inconsistent shapes");
    const double inv = 1.0 / static_cast<double>(samples.size());

    DefectField out;
    out.dim = dim;
    out.M = M;
    out.R.resize(static_cast<std::size_t>(G));
    out.min_eigenvalue = std::numeric_limits<double>::infinity();
    double trace = 0.0, second = 0.0, meansq = 0.0;
    for (Eigen::Index g = 0; g < G; ++g) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
        Eigen::MatrixXd mom = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& s : samples) {
            Eigen::VectorXd u = s.row(g).transpose();
            mean += u;
            mom += u * u.transpose();
        }
        mean *= inv;
        mom *= inv;
        Eigen::MatrixXd R = mom - mean * mean.transpose();
        R = 0.5 * (R + R.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
        out.min_eigenvalue = std::min(out.min_eigenvalue, es.eigenvalues()[0]);
        trace += R.trace();
        second += mom.trace();
        meansq += mean.squaredNorm();
        out.R[static_cast<std::size_t>(g)] = std::move(R);
    }
    out.trace_integral = 0.5 * cell_volume * trace;
    out.mean_energy = 0.5 * cell_volume * second;
    out.mean_field_energy = 0.5 * cell_volume * meansq;
    return out;
}

DefectField reynolds_defect(const std::vector<Eigen::VectorXd>& states, const Basis& basis, int grid_M) {
    if (states.size() < 2) throw std::invalid_argument("Reynolds defect needs at least two ensemble members");
    if (grid_M < min_exact_grid(basis)) throw std::invalid_argument("defect grid under-resolves the basis");
    GridEvaluator grid(basis, grid_M);
    std::vector<Eigen::MatrixXd> samples;
    samples.reserve(states.size());
    for (const auto& a : states) samples.push_back(grid.values(a));
    DefectField out = reynolds_defect_samples(basis.dim(), grid_M, samples, grid.weight());

    // Parseval: energies from coefficients
    const double inv = 1.0 / static_cast<double>(states.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(states.front().size());
    double e = 0.0;
    for (const auto& a : states) {
        mean += a;
        e += 0.5 * a.squaredNorm();
    }
    mean *= inv;
    out.mean_energy = e * inv;
    out.mean_field_energy = 0.5 * mean.squaredNorm();
    return out;
}

DefectField reynolds_defect(const Ensemble& ens, const Basis& basis, double t, int grid_M) {
    return reynolds_defect(ens.states_at(t), basis, grid_M);
}

Eigen::VectorXd solenoidal_test_field(const Basis& basis, const FourierField& phi) {
    if (phi.dim != basis.dim()) throw std::invalid_argument("test field dimension mismatch");
    if (phi.mean.size() == basis.dim() && phi.mean.norm() != 0.0)
        throw std::invalid_argument("test field has a constant component; constants are excluded");
    for (std::size_t q = 0; q < phi.k.size(); ++q) {
        Eigen::VectorXd kv(basis.dim());
        for (int c = 0; c < basis.dim(); ++c) kv[c] = phi.k[q][c];
        for (const Eigen::VectorXd* A : {&phi.cos_coef[q], &phi.sin_coef[q]})
            if (std::abs(kv.dot(*A)) > 1e-12 * kv.norm() * std::max(1.0, A->norm()))
                throw std::invalid_argument("test field is not divergence-free");
    }
    Eigen::VectorXd f = leray_project(basis, phi);
    if (f.norm() == 0.0) throw std::invalid_argument("test field has no solenoidal content");
    return f;
}

Estimate dissipative_weak_residual(const Ensemble& ens, const GalerkinSystem& sys, const FourierField& phi, double t) {
    Eigen::VectorXd f = solenoidal_test_field(sys.basis, phi);
    const Eigen::VectorXd Df = sys.dissipation() * f;
    std::vector<double> r(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m) {
        const auto& tr = ens.members[m];
        if (tr.int_state.empty()) throw std::invalid_argument("dissipative_weak_residual needs time integrals");
        const std::size_t it = tr.index_of_time(t);
        r[m] = -(tr.states[it] - tr.states[0]).dot(f) - f.dot(tr.int_convection[it]) - tr.int_state[it].dot(Df);
    }
    return mean_se(r);
}

}  // namespace sgns
