#include "sgns/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <unordered_set>

#include <unistd.h>

#include <json.hpp>

#include "quadrature_oracle.hpp"
#include "sgns/config.hpp"
#include "sgns/diagnostics.hpp"
#include "sgns/ensemble.hpp"
#include "sgns/experiments.hpp"
#include "sgns/grid.hpp"
#include "sgns/persist.hpp"
#include "sgns/rng.hpp"

namespace sgns {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string g(double v) { return fmt("%.4g", v); }

struct Stopwatch {
    Clock::time_point t0 = Clock::now();
    double seconds() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

CheckResult make(std::string id, std::string name, double value, double tol, bool pass, std::string detail,
                 const Stopwatch& sw) {
    CheckResult r;
    r.id = std::move(id);
    r.name = std::move(name);
    r.value = value;
    r.tolerance = tol;
    r.pass = pass;
    r.detail = std::move(detail);
    r.seconds = sw.seconds();
    return r;
}

Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed, std::uint32_t trial) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) a[static_cast<Eigen::Index>(i)] = counter_normal(seed, 0x56u << 24, trial, std::uint32_t(i), 0);
    return a;
}

std::string series(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g(v[i]);
    return s + "]";
}

}  // namespace

std::string check_json(const CheckResult& r) {
    nlohmann::json j{{"id", r.id},
                     {"name", r.name},
                     {"pass", r.pass},
                     {"value", r.value},
                     {"tolerance", r.tolerance},
                     {"detail", r.detail},
                     {"seconds", r.seconds}};
    return j.dump();
}

std::string check_line(const CheckResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "%s  %-28s value=%-11.4g tol=%-9.3g (%.1fs)", r.pass ? "PASS" : "FAIL",
                  r.id.c_str(), r.value, r.tolerance, r.seconds);
    return std::string(head) + "  " + r.detail;
}

GalerkinSystem reference_system(int cutoff, double nu, double additive_amp, double transport_amp) {
    Basis basis = Basis::build(2, cutoff);
    std::vector<std::pair<std::size_t, std::vector<FieldTerm>>> additive;
    if (additive_amp != 0.0) {
        additive.push_back({0, {FieldTerm{{1, 1, 0}, 0, Phase::Cos, additive_amp}}});
        additive.push_back({1, {FieldTerm{{1, -1, 0}, 0, Phase::Sin, additive_amp}}});
    }
    std::vector<TransportField> transport;
    if (transport_amp != 0.0)
        transport.push_back({2,
                             {FieldTerm{{1, 0, 0}, 0, Phase::Cos, transport_amp},
                              FieldTerm{{0, 1, 0}, 0, Phase::Sin, transport_amp}}});
    NoiseSpec noise = make_noise(basis, 3, additive, transport, cutoff);
    return make_system(basis, std::move(noise), nu);
}

CheckResult check_convection_skew(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double tol = 1e-12;
    const int trials = 100;
    double worst = 0.0;
    std::string detail;
    std::vector<std::pair<int, int>> setups = {{2, 4}};
    if (s.full) setups.push_back({3, 2});
    for (auto [dim, cutoff] : setups) {
        Basis basis = Basis::build(dim, cutoff);
        ConvectionTensor b = convection_tensor(basis);
        double w = 0.0;
        for (int t = 0; t < trials; ++t) {
            Eigen::VectorXd a = random_vector(basis.size(), s.seed, std::uint32_t(1000 * dim + t));
            a *= std::pow(10.0, (t % 7) - 3);
            double r = std::abs(a.dot(b.contract(a))) / std::pow(a.norm(), 3);
            w = std::max(w, r);
        }
        worst = std::max(worst, w);
        detail += "d=" + std::to_string(dim) + " cutoff " + std::to_string(cutoff) + " (N=" +
                  std::to_string(basis.size()) + "): max " + g(w) + "; ";
    }
    detail += std::to_string(trials) + " vectors per setup, ratio |a.B(a,a)| / |a|^3";
    return make("convection_skew", "convection skew-symmetry", worst, tol, worst <= tol, detail, sw);
}

CheckResult check_triad_sparsity(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double tol = 1e-12;
    double absent_max = 0.0, present_err = 0.0;
    std::size_t absent = 0, present = 0;
    std::vector<std::pair<int, int>> setups = {{2, s.full ? 3 : 2}};
    if (s.full) setups.push_back({3, 1});
    std::string detail;
    for (auto [dim, cutoff] : setups) {
        Basis basis = Basis::build(dim, cutoff);
        ConvectionTensor b = convection_tensor(basis);
        const std::size_t n = basis.size();
        const int M = 3 * cutoff + 3;
        std::vector<double> dense = oracle::dense_convection(basis, M);
        std::unordered_set<std::uint64_t> stored;
        for (const auto& e : b.entries()) {
            std::uint64_t key = (std::uint64_t(e.i) * n + e.k) * n + e.j;
            stored.insert(key);
            present_err = std::max(present_err, std::abs(e.value - dense[key]));
            ++present;
        }
        for (std::size_t key = 0; key < dense.size(); ++key) {
            if (stored.count(key)) continue;
            ++absent;
            absent_max = std::max(absent_max, std::abs(dense[key]));
        }
        detail += "d=" + std::to_string(dim) + " cutoff " + std::to_string(cutoff) + " nnz " +
                  std::to_string(b.nnz()) + "/" + std::to_string(dense.size()) + "; ";
    }
    detail += "max |oracle| on absent entries " + g(absent_max) + " (" + std::to_string(absent) +
              " entries), max stored-entry error " + g(present_err);
    double value = std::max(absent_max, present_err);
    return make("triad_sparsity", "triad sparsity exactness", value, tol, value <= tol, detail, sw);
}

CheckResult check_transport_energy(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double tol = 1e-4;
    constexpr double min_order = 0.9;
    GalerkinSystem sys = reference_system(2, 0.0, 0.0, 2.0);
    Eigen::VectorXd a0 = smooth_random_field(sys.basis, s.seed + 3, 1.0, 2.0);
    const std::vector<double> dts = {1e-2, 1e-3, 1e-4};
    const std::size_t paths = s.full ? 8 : 2;
    std::vector<double> mean_drift;
    double worst_fine = 0.0;
    IntegrateOptions opt;
    opt.save_stride = 0;
    opt.guard = GuardPolicy::Report;
    const double e0 = kinetic_energy(a0);
    for (double dt : dts) {
        std::vector<double> drift(paths);
        parallel_for(paths, s.threads, [&](std::size_t p) {
            PathSpec path = make_path(member_seed(s.seed + 3, p), 1.0, dt, 0, sys.K());
            Trajectory tr = integrate(sys, a0, path, Scheme::Heun, opt);
            drift[p] = tr.blew_up ? std::numeric_limits<double>::infinity()
                                  : std::abs(tr.record.E.back() - e0) / e0;
        });
        mean_drift.push_back(mean_se(drift).mean);
        if (dt == dts.back()) worst_fine = *std::max_element(drift.begin(), drift.end());
    }
    double order = loglog_slope(dts, mean_drift);
    bool pass = worst_fine <= tol && order >= min_order;
    std::string detail = "max |dE|/E at dt=1e-4 over " + std::to_string(paths) + " paths " + g(worst_fine) +
                         "; mean drift vs dt " + series(mean_drift) + ", order " + g(order) + " (need >= 0.9)";
    return make("transport_energy", "transport-noise energy conservation", worst_fine, tol, pass, detail, sw);
}

CheckResult check_additive_energy_balance(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double z_max = 3.0;
    GalerkinSystem sys = reference_system(2, 0.0, 0.16, 0.0);
    Eigen::VectorXd a0 = smooth_random_field(sys.basis, s.seed + 4, 0.5, 2.0);
    EnsembleConfig cfg;
    cfg.T = 1.0;
    cfg.root_dt = 1e-3;
    cfg.level = 0;
    cfg.scheme = Scheme::EulerMaruyama;
    cfg.guard = GuardPolicy::Report;
    cfg.threads = s.threads;
    cfg.base_seed = s.seed + 4;
    const std::size_t M = s.full ? 10000 : 1000;
    Ensemble ens = run_ensemble(sys, fixed_initial(a0), M, cfg);
    std::vector<double> gain(M);
    for (std::size_t m = 0; m < M; ++m) gain[m] = ens.members[m].record.E.back() - ens.members[m].record.E.front();
    Estimate e = mean_se(gain);
    const double expected = 0.5 * cfg.T * sys.eta_hs;
    double z = std::abs(e.mean - expected) / e.se;
    std::string detail = "M=" + std::to_string(M) + " EM dt=1e-3: mean gain " + fmt("%.6f", e.mean) + " +- " +
                         fmt("%.6f", e.se) + ", expected 1/2 T |sigma1|_HS^2 = " + fmt("%.6f", expected) +
                         " (in SE units)";
    return make("additive_energy_balance", "additive-noise mean energy balance", z, z_max, z <= z_max, detail, sw);
}

CheckResult check_viscous_decay(const VerifyScale&) {
    Stopwatch sw;
    constexpr double tol = 1e-3;
    constexpr double slope_tol = 0.1;
    Basis basis = Basis::build(2, 2);
    GalerkinSystem sys = make_system(basis, no_noise(basis.size()), 0.1);
    Eigen::VectorXd a0 = Eigen::VectorXd::Zero(basis.size());
    a0[*basis.find({1, 0, 0}, 0, Phase::Cos)] = 1.0;
    const double exact = std::exp(-0.2);
    std::vector<double> dts = {1e-3, 5e-4, 2.5e-4}, errs;
    for (double dt : dts) {
        PathSpec path = make_path(0, 1.0, dt, 0, 0);
        Trajectory tr = integrate(sys, a0, path, Scheme::EulerMaruyama, {0});
        errs.push_back(std::abs(tr.states.back().squaredNorm() - exact));
    }
    double slope = loglog_slope(dts, errs);
    bool pass = errs[0] <= tol && std::abs(slope - 1.0) <= slope_tol;
    std::string detail = "| |u(1)|^2 - exp(-0.2) | at dt " + series(dts) + " = " + series(errs) + ", slope " +
                         g(slope) + " (need 1 +- 0.1)";
    return make("viscous_decay", "viscous decay of a single mode", errs[0], tol, pass, detail, sw);
}

CheckResult check_scheme_agreement(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double z_max = 3.0;
    GalerkinSystem sys = reference_system(2, 0.05, 0.16, 2.0);
    Eigen::VectorXd a0 = smooth_random_field(sys.basis, s.seed + 6, 1.0, 2.0);
    const std::size_t M = s.full ? 4096 : 512;
    EnsembleConfig cfg;
    cfg.T = 1.0;
    cfg.root_dt = 1e-3;
    cfg.guard = GuardPolicy::Report;
    cfg.threads = s.threads;

    auto final_energy = [&](const GalerkinSystem& system, Scheme scheme, std::uint64_t seed) {
        EnsembleConfig c = cfg;
        c.scheme = scheme;
        c.base_seed = seed;
        Ensemble ens = run_ensemble(system, fixed_initial(a0), M, c);
        std::vector<double> e(M);
        for (std::size_t m = 0; m < M; ++m) e[m] = ens.members[m].record.E.back();
        return mean_se(e);
    };
    Estimate heun = final_energy(sys, Scheme::Heun, s.seed + 61);
    Estimate em = final_energy(sys, Scheme::EulerMaruyama, s.seed + 62);
    double z = std::abs(heun.mean - em.mean) / std::hypot(heun.se, em.se);

    // negative control: Euler-Maruyama read as if the noise were Ito, no correction drift
    GalerkinSystem bare = sys;
    bare.corr.setZero();
    Estimate ctl = final_energy(bare, Scheme::EulerMaruyama, s.seed + 63);
    double z_ctl = std::abs(heun.mean - ctl.mean) / std::hypot(heun.se, ctl.se);

    std::string detail = "M=" + std::to_string(M) + " dt=1e-3: Heun E(T) " + fmt("%.5f", heun.mean) + " +- " +
                         fmt("%.5f", heun.se) + ", EM " + fmt("%.5f", em.mean) + " +- " + fmt("%.5f", em.se) +
                         "; control without correction " + fmt("%.5f", ctl.mean) + " sits " + g(z_ctl) +
                         " combined SE away";
    return make("scheme_agreement", "Ito/Stratonovich scheme agreement", z, z_max, z <= z_max, detail, sw);
}

std::vector<CheckResult> check_viscosity_sweep(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double ratio_max = 2.0;
    constexpr double exp_lo = 0.4, exp_hi = 0.6;
    GalerkinSystem tmpl = reference_system(s.full ? 4 : 2, 0.1, 0.05, 1.0);
    Eigen::VectorXd a0 = smooth_random_field(tmpl.basis, s.seed + 7, 1.0, 2.0);
    SweepPlan plan;
    plan.nu = {1e-1, 1e-2, 1e-3, 1e-4};
    plan.coupling = Coupling::Shared;
    plan.members = s.full ? 256 : 32;
    plan.ensemble.T = 1.0;
    plan.ensemble.root_dt = 1e-3;
    plan.ensemble.scheme = Scheme::Heun;
    plan.ensemble.guard = GuardPolicy::Report;
    plan.ensemble.threads = s.threads;
    plan.ensemble.base_seed = s.seed + 7;
    plan.gap_battery = false;
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(tmpl.N());
    phi[*tmpl.basis.find({1, 1, 0}, 0, Phase::Cos)] = 1.0;
    SweepReport rep = viscosity_sweep(plan, tmpl, fixed_initial(a0), phi);

    std::vector<double> moments, visc, weighted;
    for (const auto& p : rep.points) {
        moments.push_back(p.moments.sup_moment.mean);
        visc.push_back(p.viscous_functional.mean);
        weighted.push_back(p.weighted_term);
    }
    std::string axis = "cutoff " + std::to_string(tmpl.basis.cutoff()) + ", nu " + series(plan.nu) +
                       ", M=" + std::to_string(plan.members);
    CheckResult moment =
        make("moment_uniformity", "moment uniformity in viscosity", rep.moment_ratio, ratio_max,
             rep.moment_ratio <= ratio_max && rep.viscous_bounded,
             axis + ": E sup|u|^4 " + series(moments) + " (max/min ratio), nu E int|grad u|^2 " + series(visc) +
                 (rep.viscous_bounded ? " bounded" : " grows as nu decreases"),
             sw);
    CheckResult expo = make("viscous_exponent", "weighted viscous term exponent", rep.fitted_exponent, exp_hi,
                            rep.fitted_exponent >= exp_lo && rep.fitted_exponent <= exp_hi,
                            axis + ": sqrt(nu) (nu E int|grad u|^2)^(1/2) |grad phi| = " + series(weighted) +
                                ", fitted exponent " + g(rep.fitted_exponent) + " (need [0.4, 0.6])",
                            sw);
    return {moment, expo};
}

CheckResult check_reynolds_defect(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double eig_floor = -1e-10;
    constexpr double identity_tol = 1e-12;
    GalerkinSystem sys = reference_system(2, 0.05, 0.16, 2.0);
    EnsembleConfig cfg;
    cfg.T = 1.0;
    cfg.root_dt = 1e-3;
    cfg.scheme = Scheme::Heun;
    cfg.guard = GuardPolicy::Report;
    cfg.threads = s.threads;
    cfg.base_seed = s.seed + 9;
    const std::size_t M = s.full ? 1024 : 128;
    Ensemble ens = run_ensemble(sys, gaussian_initial(sys.basis, 0.5, 2.0), M, cfg);
    DefectField d = reynolds_defect(ens, sys.basis, 1.0, 16);
    double mismatch = std::abs(d.trace_integral - (d.mean_energy - d.mean_field_energy));
    bool pass = d.min_eigenvalue >= eig_floor && mismatch <= identity_tol;
    std::string detail = "M=" + std::to_string(M) + " at T=1 on a 16^2 grid: min eigenvalue " + g(d.min_eigenvalue) +
                         " (floor -1e-10), 1/2 int tr R " + fmt("%.15g", d.trace_integral) + " vs E - 1/2|u_bar|^2 " +
                         fmt("%.15g", d.mean_energy - d.mean_field_energy);
    return make("reynolds_defect", "Reynolds defect properties", mismatch, identity_tol, pass, detail, sw);
}

CheckResult check_gap_battery(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double tol = 5e-3;
    struct Case {
        const char* label;
        double nu;
    };
    const std::vector<Case> cases = {{"NSE nu=0.05", 0.05}, {"Euler nu=0", 0.0}};
    const std::vector<int> levels = s.full ? std::vector<int>{0, 1, 2} : std::vector<int>{0, 1};
    const std::size_t paths = s.full ? 8 : 2;
    std::vector<double> dts;
    for (int l : levels) dts.push_back(std::ldexp(1e-3, -l));

    double worst = -std::numeric_limits<double>::infinity();
    bool bitwise = true;
    std::string detail;
    for (const auto& c : cases) {
        GalerkinSystem sys = reference_system(2, c.nu, 0.16, 1.0);
        Eigen::VectorXd a0 = smooth_random_field(sys.basis, s.seed + 10, 1.0, 2.0);
        auto library = test_process_library(sys, 1.0, s.seed + 10);
        const std::size_t P = library.size();
        // gaps[q][path * P + process]
        std::vector<std::vector<double>> gaps(levels.size(), std::vector<double>(paths * P));
        std::vector<int> zero_ok(paths, 1);
        parallel_for(paths * levels.size(), s.threads, [&](std::size_t job) {
            const std::size_t q = job % levels.size(), p = job / levels.size();
            PathSpec path = make_path(member_seed(s.seed + 10, p), 1.0, 1e-3, levels[q], sys.K());
            IntegrateOptions opt;
            opt.save_stride = 1;
            opt.guard = GuardPolicy::Report;
            Trajectory tr = integrate(sys, a0, path, Scheme::Heun, opt);
            for (std::size_t i = 0; i < P; ++i)
                gaps[q][p * P + i] = energy_variational_gap(tr, library[i], sys, 0.0, 1.0);
            if (q == 0) {
                double zero_gap = energy_variational_gap(tr, zero_test_process(sys.N()), sys, 0.0, 1.0);
                zero_ok[p] = zero_gap == energy_residual(tr, sys, 0.0, 1.0);
            }
        });
        for (int ok : zero_ok) bitwise = bitwise && ok;
        std::vector<double> rms;
        for (const auto& v : gaps) rms.push_back(std::sqrt(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())).squaredNorm() / double(v.size())));
        double level0_max = *std::max_element(gaps[0].begin(), gaps[0].end());
        worst = std::max(worst, level0_max);
        detail += std::string(c.label) + ": max gap at dt=1e-3 " + g(level0_max) + ", rms gap vs dt " + series(dts) +
                  " = " + series(rms) + " (order " + g(loglog_slope(dts, rms)) + "); ";
    }
    detail += std::to_string(paths) + " paths x 10 test processes; phi=0 reproduces the energy residual bitwise: " +
              (bitwise ? "yes" : "no");
    return make("gap_battery", "energy-variational gap battery", worst, tol, worst <= tol && bitwise, detail, sw);
}

CheckResult check_weak_strong(const VerifyScale& s) {
    Stopwatch sw;
    constexpr double factor = 1.1;
    const double nu = 0.01, amp = 0.1;
    auto build = [&](int cutoff) {
        Basis basis = Basis::build(2, cutoff);
        std::vector<std::pair<std::size_t, std::vector<FieldTerm>>> additive = {
            {0, {FieldTerm{{1, 1, 0}, 0, Phase::Cos, amp}}}, {1, {FieldTerm{{2, -1, 0}, 0, Phase::Sin, amp}}}};
        return make_system(basis, make_noise(basis, 2, additive, {}, cutoff), nu);
    };
    GalerkinSystem coarse = build(2), fine = build(3);
    auto map = embed_basis(coarse.basis, fine.basis);
    const std::size_t M = s.full ? 256 : 32;
    std::vector<double> re(M), bound(M);
    IntegrateOptions opt;
    opt.save_stride = 1;
    opt.guard = GuardPolicy::Report;
    parallel_for(M, s.threads, [&](std::size_t m) {
        std::uint64_t seed = member_seed(s.seed + 11, m);
        Eigen::VectorXd u0 = smooth_random_field(fine.basis, seed, 1.0, 2.0);
        Eigen::VectorXd a0(coarse.N());
        for (std::size_t i = 0; i < map.size(); ++i) a0[Eigen::Index(i)] = u0[Eigen::Index(map[i])];
        PathSpec path = make_path(seed, 1.0, 1e-3, 0, 2);
        Trajectory tc = integrate(coarse, a0, path, Scheme::Heun, opt);
        Trajectory tf = integrate(fine, u0, path, Scheme::Heun, opt);
        RelativeEnergySeries r = relative_energy(tc, coarse.basis, tf, fine.basis, 0.0, 1.0);
        re[m] = r.relative_energy.back();
        bound[m] = r.bound.back();
    });
    Estimate mre = mean_se(re), mb = mean_se(bound);
    double ratio = mre.mean / mb.mean;
    std::string detail = "cutoff 2 (N=24) vs 3 (N=48), M=" + std::to_string(M) + ": mean relative energy at T " +
                         g(mre.mean) + " +- " + g(mre.se) + ", mean Gronwall bound " + g(mb.mean) + " (ratio)";
    return make("weak_strong", "weak-strong relative energy", ratio, factor, ratio <= factor, detail, sw);
}

CheckResult check_strong_order(const VerifyScale& s) {
    Stopwatch sw;
    const std::size_t M = s.full ? 128 : 16;
    const std::vector<int> levels = {0, 1, 2};
    GalerkinSystem transport = reference_system(2, 0.05, 0.0, 2.0);
    GalerkinSystem additive = reference_system(2, 0.05, 0.3, 0.0);
    Eigen::VectorXd a0 = smooth_random_field(transport.basis, s.seed + 12, 1.0, 2.0);
    OrderReport rt = order_study(transport, Scheme::EulerMaruyama, fixed_initial(a0), levels, 1e-2, 1.0, M,
                                 s.seed + 12, s.threads, 4);
    OrderReport ra = order_study(additive, Scheme::EulerMaruyama, fixed_initial(a0), levels, 1e-2, 1.0, M,
                                 s.seed + 13, s.threads, 4);
    bool pass = rt.slope >= 0.4 && rt.slope <= 0.6 && ra.slope >= 0.9 && ra.slope <= 1.1;
    auto errs = [](const OrderReport& r) {
        std::vector<double> e;
        for (const auto& x : r.error) e.push_back(x.mean);
        return series(e);
    };
    std::string detail = "dt " + series(rt.dt) + ", M=" + std::to_string(M) + ": transport errors " + errs(rt) +
                         " slope " + g(rt.slope) + " (need [0.4, 0.6]); additive errors " + errs(ra) + " slope " +
                         g(ra.slope) + " (need [0.9, 1.1])";
    return make("strong_order", "strong-order study", rt.slope, 0.6, pass, detail, sw);
}

CheckResult check_determinism(const VerifyScale& s) {
    Stopwatch sw;
    RunConfig cfg;
    cfg.cutoff = 3;
    cfg.nu = 0.02;
    cfg.brownian_modes = 2;
    cfg.additive = {{0, {FieldTerm{{1, 1, 0}, 0, Phase::Cos, 0.2}}}};
    cfg.transport = {{1, {FieldTerm{{1, 0, 0}, 0, Phase::Cos, 0.4}}}};
    cfg.dt = 1e-3;
    cfg.T = s.full ? 1.0 : 0.2;
    cfg.initial.kind = "random";
    cfg.initial.amplitude = 0.5;
    cfg.members = s.full ? 8 : 3;
    cfg.seed = s.seed + 13;
    cfg.save_stride = 5;
    // round-trip through the canonical text so the hash covers what is run
    cfg = load_config(emit_config(cfg));
    const std::uint64_t hash = config_hash(cfg);
    GalerkinSystem sys = build_system(cfg);

    std::size_t bad = 0;
    std::vector<std::string> notes;
    auto run_bytes = [&](unsigned threads) {
        Ensemble ens = run_ensemble(sys, build_initial(cfg, sys.basis), cfg.members, build_ensemble_config(cfg, threads));
        std::string all;
        for (const auto& m : ens.members) all += encode_trajectory(m, 2, hash);
        return all;
    };
    std::string first = run_bytes(1), again = run_bytes(1), threaded = run_bytes(std::max(2u, resolve_threads(s.threads)));
    if (first != again) {
        ++bad;
        notes.push_back("repeat run differs");
    }
    if (first != threaded) {
        ++bad;
        notes.push_back("thread count changes bytes");
    }

    Eigen::VectorXd a0 = build_initial(cfg, sys.basis)(0, member_seed(cfg.seed, 0));
    Trajectory tr = integrate(sys, a0, build_path(cfg, member_seed(cfg.seed, 0)), cfg.scheme, {cfg.save_stride});
    auto dir = std::filesystem::temp_directory_path() / ("sgns_determinism_" + std::to_string(::getpid()));
    std::string file = (dir / "member.sgt").string();
    std::string bytes = encode_trajectory(tr, 2, hash);
    save_trajectory(file, tr, 2, hash);
    if (read_file(file) != bytes) {
        ++bad;
        notes.push_back("file bytes differ from the encoder");
    }
    StoredTrajectory back = load_trajectory(file, hash);
    if (encode_trajectory(back.trajectory, back.dim, back.config_hash) != bytes) {
        ++bad;
        notes.push_back("save-load-save is not bitwise");
    }
    bool states_equal = back.trajectory.states.size() == tr.states.size();
    for (std::size_t i = 0; states_equal && i < tr.states.size(); ++i)
        states_equal = back.trajectory.states[i] == tr.states[i] && back.trajectory.times[i] == tr.times[i];
    if (!states_equal) {
        ++bad;
        notes.push_back("loaded states differ");
    }
    std::filesystem::remove_all(dir);

    std::string detail = std::to_string(cfg.members) + " members, " + std::to_string(first.size()) +
                         " bytes per run: repeat, 1 vs multi-thread, save/load round trip";
    for (const auto& n : notes) detail += "; " + n;
    return make("determinism", "determinism and persistence", double(bad), 0.0, bad == 0, detail, sw);
}

std::vector<CheckResult> structural_checks(const VerifyScale& s) {
    std::vector<CheckResult> out;
    const int cutoff = s.full ? 3 : 2;
    Basis basis = Basis::build(2, cutoff);
    const int M = 3 * cutoff + 3;

    {
        Stopwatch sw;
        Eigen::MatrixXd G = oracle::gram(basis, 2 * cutoff + 2);
        double err = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
        out.push_back(make("gram", "basis orthonormality", err, 1e-12, err <= 1e-12,
                           "quadrature Gram matrix at cutoff " + std::to_string(cutoff), sw));
    }
    {
        Stopwatch sw;
        oracle::ModeTable t = oracle::tabulate(basis, M);
        double worst = 0.0;
        for (const auto& gr : t.grad)
            worst = std::max(worst, (gr.col(0) + gr.col(3)).cwiseAbs().maxCoeff());
        out.push_back(make("divergence", "modes are divergence-free", worst, 1e-12, worst <= 1e-12,
                           "max pointwise divergence over all modes", sw));
    }
    {
        Stopwatch sw;
        Eigen::VectorXd a = random_vector(basis.size(), s.seed, 7);
        Eigen::VectorXd back = leray_project(basis, to_fourier(basis, a));
        Eigen::VectorXd twice = leray_project(basis, to_fourier(basis, back));
        double err = std::max((back - a).cwiseAbs().maxCoeff(), (twice - back).cwiseAbs().maxCoeff());
        out.push_back(make("leray", "Leray projection idempotence", err, 1e-13, err <= 1e-13,
                           "project(expand(a)) = a and projection is idempotent", sw));
    }
    {
        Stopwatch sw;
        GalerkinSystem sys = reference_system(cutoff, 0.05, 0.16, 0.5);
        const auto& field = sys.noise.transport.fields.front();
        std::vector<Mode> modes;
        std::vector<double> coef;
        for (const auto& t : field.terms) {
            modes.push_back(basis.mode(*basis.find(t.k, t.pol, t.phase)));
            coef.push_back(t.amp);
        }
        Eigen::MatrixXd dense = oracle::dense_transport(basis, modes, coef, M);
        Eigen::MatrixXd z(sys.noise.transport.zeta.front());
        double err = (dense - z).cwiseAbs().maxCoeff();
        double skew = (z + z.transpose()).cwiseAbs().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.corr, Eigen::EigenvaluesOnly);
        double min_eig = es.eigenvalues()[0];
        double v = std::max(err, skew);
        out.push_back(make("transport_matrix", "transport matrix vs oracle", v, 1e-12,
                           v <= 1e-12 && min_eig >= -1e-12,
                           "skew defect " + g(skew) + ", oracle error " + g(err) + ", min eigenvalue of correction " +
                               g(min_eig),
                           sw));

        Stopwatch sw2;
        std::vector<double> b = oracle::dense_convection(basis, M);
        double worst = 0.0;
        for (std::uint32_t t = 0; t < 5; ++t) {
            Eigen::VectorXd a = random_vector(basis.size(), s.seed, 100 + t);
            Eigen::VectorXd ref = -oracle::dense_contract(b, basis.size(), a) - sys.nu * sys.lap.cwiseProduct(a) -
                                  sys.corr * a;
            worst = std::max(worst, (drift(sys, a) - ref).cwiseAbs().maxCoeff());
            Eigen::MatrixXd G = diffusion(sys, a);
            Eigen::MatrixXd Gref = sys.noise.additive.eta;
            Gref.col(2) += dense * a;
            worst = std::max(worst, (G - Gref).cwiseAbs().maxCoeff());
        }
        out.push_back(make("drift_diffusion", "drift and diffusion vs oracle", worst, 1e-11, worst <= 1e-11,
                           "5 random states against dense contraction and quadrature transport", sw2));
    }
    {
        Stopwatch sw;
        PathSpec coarse = make_path(s.seed, 0.5, 1e-2, 0, 3);
        PathSpec fine = coarse.refined(2);
        Eigen::MatrixXd wc = BrownianPath(coarse).materialize();
        Eigen::MatrixXd wf = BrownianPath(fine).materialize();
        double err = 0.0;
        for (Eigen::Index n = 0; n < wc.rows(); ++n)
            err = std::max(err, (wf.middleRows(4 * n, 4).colwise().sum() - wc.row(n)).cwiseAbs().maxCoeff());
        out.push_back(make("brownian_refinement", "Brownian path refinement consistency", err, 1e-13, err <= 1e-13,
                           "fine increments sum to the coarse increment", sw));
    }
    return out;
}

std::vector<CheckResult> run_criteria(const VerifyScale& s, const CheckSink& sink) {
    std::vector<CheckResult> out;
    auto push = [&](CheckResult r) {
        if (sink) sink(r);
        out.push_back(std::move(r));
    };
    push(check_convection_skew(s));
    push(check_triad_sparsity(s));
    push(check_transport_energy(s));
    push(check_additive_energy_balance(s));
    push(check_viscous_decay(s));
    push(check_scheme_agreement(s));
    for (auto& r : check_viscosity_sweep(s)) push(std::move(r));
    push(check_reynolds_defect(s));
    push(check_gap_battery(s));
    push(check_weak_strong(s));
    push(check_strong_order(s));
    push(check_determinism(s));
    return out;
}

}  // namespace sgns
