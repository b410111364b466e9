#include "sgns/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace sgns {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs matching series of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("slope fit needs positive data");
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

std::uint64_t default_point_hash(double nu) {
    std::uint64_t bits;
    std::memcpy(&bits, &nu, sizeof bits);
    std::uint64_t h = 14695981039346656037ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

SweepReport viscosity_sweep(const SweepPlan& plan, const GalerkinSystem& tmpl, const InitialSampler& initial,
                            const Eigen::VectorXd& phi) {
    if (plan.nu.empty()) throw std::invalid_argument("viscosity sweep needs at least one value");
    for (double v : plan.nu)
        if (!(v > 0.0)) throw std::invalid_argument("viscosity sweep values must be positive");
    for (std::size_t i = 1; i < plan.nu.size(); ++i)
        if (!(plan.nu[i] < plan.nu[i - 1])) throw std::invalid_argument("viscosity axis must be strictly decreasing");
    if (static_cast<std::size_t>(phi.size()) != tmpl.N()) throw std::invalid_argument("sweep test field has the wrong length");

    const double grad_phi = std::sqrt(gradient_energy(tmpl.lap, phi));
    SweepReport rep;
    std::vector<Ensemble> ensembles;
    ensembles.reserve(plan.nu.size());
    for (std::size_t q = 0; q < plan.nu.size(); ++q) {
        GalerkinSystem sys = with_viscosity(tmpl, plan.nu[q]);
        EnsembleConfig cfg = plan.ensemble;
        if (plan.coupling == Coupling::Independent) cfg.base_seed = plan.ensemble.base_seed + 0x9E37ull * (q + 1);
        SweepPoint pt;
        pt.nu = plan.nu[q];
        pt.config_hash = plan.point_hash ? plan.point_hash(pt.nu) : default_point_hash(pt.nu);
        cfg.config_hash = pt.config_hash;
        Ensemble ens = run_ensemble(sys, initial, plan.members, cfg);
        pt.moments = moment_report(ens, plan.moment_p);
        pt.viscous_functional = pt.moments.viscous_functional;
        pt.weighted_term = std::sqrt(pt.nu) * std::sqrt(pt.viscous_functional.mean) * grad_phi;
        std::vector<double> res(ens.size());
        for (std::size_t m = 0; m < ens.size(); ++m) {
            const auto& tr = ens.members[m];
            res[m] = energy_residual_between(tr, sys, 0, tr.size() - 1);
            if (tr.blew_up) ++pt.blowups;
        }
        pt.energy_residual = mean_se(res);
        rep.points.push_back(pt);
        ensembles.push_back(std::move(ens));
    }

    for (std::size_t q = 0; q + 1 < ensembles.size(); ++q) {
        std::vector<double> d(ensembles[q].size());
        for (std::size_t m = 0; m < d.size(); ++m)
            d[m] = (ensembles[q].members[m].states.back() - ensembles[q + 1].members[m].states.back()).norm();
        rep.points[q].cauchy_next = mean_se(d).mean;
    }

    std::vector<double> nus, terms;
    double mmax = 0.0, mmin = std::numeric_limits<double>::infinity();
    for (const auto& pt : rep.points) {
        nus.push_back(pt.nu);
        terms.push_back(pt.weighted_term);
        mmax = std::max(mmax, pt.moments.sup_moment.mean);
        mmin = std::min(mmin, pt.moments.sup_moment.mean);
    }
    rep.moment_ratio = mmin > 0.0 ? mmax / mmin : std::numeric_limits<double>::infinity();
    rep.fitted_exponent = rep.points.size() >= 2 ? loglog_slope(nus, terms) : 0.0;
    // bounded: no value at smaller nu exceeds the largest-nu value by more than 3 SE
    const auto& first = rep.points.front().viscous_functional;
    for (const auto& pt : rep.points)
        if (pt.viscous_functional.mean > first.mean + 3.0 * (first.se + pt.viscous_functional.se))
            rep.viscous_bounded = false;

    if (plan.gap_battery) {
        GalerkinSystem sys = with_viscosity(tmpl, plan.nu.back());
        const Trajectory& m0 = ensembles.back().members.front();
        IntegrateOptions opt;
        opt.save_stride = 1;
        opt.guard = plan.ensemble.guard;
        Trajectory full = integrate(sys, m0.states.front(), m0.path, m0.scheme, opt);
        for (const auto& tp : test_process_library(sys, plan.ensemble.T, plan.library_seed)) {
            rep.gap_names.push_back(tp.name);
            rep.gaps.push_back(energy_variational_gap(full, tp, sys, 0.0, full.times.back()));
        }
    }
    return rep;
}

OrderReport order_study(const GalerkinSystem& sys, Scheme scheme, const InitialSampler& initial,
                        const std::vector<int>& levels, double root_dt, double T, std::size_t M,
                        std::uint64_t base_seed, unsigned threads, int reference_extra) {
    if (levels.size() < 3) throw std::invalid_argument("order study needs at least three step sizes");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] != levels[i - 1] + 1) throw std::invalid_argument("order study levels must be consecutive (dyadic dt axis)");
    if (reference_extra < 1) throw std::invalid_argument("reference must be finer than the axis");
    const int ref_level = levels.back() + reference_extra;

    std::vector<std::vector<double>> err(levels.size(), std::vector<double>(M));
    IntegrateOptions opt;
    opt.save_stride = 0;
    opt.guard = GuardPolicy::Report;
    parallel_for(M, threads, [&](std::size_t m) {
        std::uint64_t seed = member_seed(base_seed, m);
        Eigen::VectorXd a0 = initial(m, seed);
        PathSpec ref = make_path(seed, T, root_dt, ref_level, sys.K());
        Eigen::VectorXd aref = integrate(sys, a0, ref, scheme, opt).states.back();
        for (std::size_t q = 0; q < levels.size(); ++q) {
            PathSpec p = make_path(seed, T, root_dt, levels[q], sys.K());
            Trajectory tr = integrate(sys, a0, p, scheme, opt);
            err[q][m] = tr.blew_up ? std::numeric_limits<double>::infinity() : (tr.states.back() - aref).norm();
        }
    });

    OrderReport rep;
    rep.reference_dt = std::ldexp(root_dt, -ref_level);
    std::vector<double> means;
    for (std::size_t q = 0; q < levels.size(); ++q) {
        rep.dt.push_back(std::ldexp(root_dt, -levels[q]));
        rep.error.push_back(mean_se(err[q]));
        means.push_back(rep.error.back().mean);
    }
    rep.slope = loglog_slope(rep.dt, means);
    return rep;
}

KernelBenchmarkRow kernel_benchmark(const GalerkinSystem& sys, std::size_t reps) {
    KernelBenchmarkRow row;
    row.cutoff = sys.basis.cutoff();
    row.N = sys.N();
    row.nnz = sys.b.nnz();
    row.reps = reps;
    Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(sys.N()), -1.0, 1.0);
    Eigen::VectorXd out(sys.N());
    volatile double sink = 0.0;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) {
        a[0] += 1e-12;
        sys.b.contract(a, out);
        sink = sink + (out.size() ? out[0] : 0.0);
    }
    auto t1 = std::chrono::steady_clock::now();
    row.seconds = std::chrono::duration<double>(t1 - t0).count();
    row.contractions_per_second = row.seconds > 0.0 ? static_cast<double>(reps) / row.seconds : 0.0;
    // entry stream (3 indices + value) plus state reads and output writes
    row.bytes_per_contraction = static_cast<double>(row.nnz * sizeof(TriadEntry) + 2 * row.N * sizeof(double));
    return row;
}

std::vector<KernelBenchmarkRow> kernel_benchmark(int dim, const std::vector<int>& cutoffs, std::size_t reps) {
    std::vector<KernelBenchmarkRow> rows;
    for (int c : cutoffs) {
        Basis basis = Basis::build(dim, c);
        NoiseSpec noise = no_noise(basis.size());
        rows.push_back(kernel_benchmark(make_system(basis, std::move(noise), 0.0), reps));
    }
    return rows;
}

}  // namespace sgns
