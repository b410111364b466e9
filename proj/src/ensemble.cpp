#include "sgns/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "sgns/grid.hpp"
#include "sgns/rng.hpp"

namespace sgns {

namespace {

double tree_sum_range(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return x[0];
    std::size_t h = n / 2;
    return tree_sum_range(x, h) + tree_sum_range(x + h, n - h);
}

constexpr std::uint32_t kInitialDomain = 0x49u << 24;

}  // namespace

double tree_sum(const std::vector<double>& x) { return tree_sum_range(x.data(), x.size()); }

Estimate mean_se(const std::vector<double>& x) {
    Estimate e;
    if (x.empty()) return e;
    const double n = static_cast<double>(x.size());
    e.mean = tree_sum(x) / n;
    if (x.size() < 2) return e;
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - e.mean) * (x[i] - e.mean);
    e.se = std::sqrt(tree_sum(dev) / (n - 1.0) / n);
    return e;
}

std::uint64_t member_seed(std::uint64_t base_seed, std::size_t index) {
    return splitmix64(base_seed) ^ static_cast<std::uint64_t>(index);
}

InitialSampler fixed_initial(const Eigen::VectorXd& a0) {
    return [a0](std::size_t, std::uint64_t) { return a0; };
}

InitialSampler gaussian_initial(const Basis& basis, double amplitude, double decay) {
    Eigen::VectorXd scale(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        scale[i] = amplitude / std::pow(1.0 + basis.mode(i).k2, 0.5 * decay);
    return [scale](std::size_t, std::uint64_t seed) {
        Eigen::VectorXd a(scale.size());
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a[i] = scale[i] * counter_normal(seed, kInitialDomain, std::uint32_t(i), 0, 0);
        return a;
    };
}

Eigen::VectorXd smooth_random_field(const Basis& basis, std::uint64_t seed, double l2_norm, double decay) {
    Eigen::VectorXd a = gaussian_initial(basis, 1.0, decay)(0, seed);
    double n = a.norm();
    return n > 0.0 ? Eigen::VectorXd(a * (l2_norm / n)) : a;
}

std::vector<Eigen::VectorXd> Ensemble::states_at(double t) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.states[m.index_of_time(t)]);
    return out;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    unsigned nt = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (unsigned w = 0; w < nt; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Ensemble run_ensemble(const GalerkinSystem& sys, const InitialSampler& initial, std::size_t M,
                      const EnsembleConfig& cfg) {
    if (M < 1) throw std::invalid_argument("ensemble needs at least one member");
    Ensemble ens;
    ens.config_hash = cfg.config_hash;
    ens.base_seed = cfg.base_seed;
    ens.probe_times = cfg.probe_times;
    ens.seeds.resize(M);
    for (std::size_t i = 0; i < M; ++i) ens.seeds[i] = member_seed(cfg.base_seed, i);

    PathSpec tmpl = make_path(0, cfg.T, cfg.root_dt, cfg.level, sys.K());
    IntegrateOptions opt;
    opt.save_stride = cfg.save_stride;
    opt.keep_integrals = cfg.keep_integrals;
    opt.guard = cfg.guard;
    for (double t : cfg.probe_times) {
        double x = t / tmpl.dt();
        double r = std::round(x);
        if (r < 0 || std::abs(x - r) > 1e-6 || static_cast<std::size_t>(r) > tmpl.n_steps)
            throw std::invalid_argument("probe time " + std::to_string(t) + " is off the time grid");
        opt.extra_saves.push_back(static_cast<std::size_t>(r));
    }

    ens.members.resize(M);
    parallel_for(M, cfg.threads, [&](std::size_t i) {
        PathSpec p = tmpl;
        p.seed = ens.seeds[i];
        ens.members[i] = integrate(sys, initial(i, ens.seeds[i]), p, cfg.scheme, opt);
    });
    return ens;
}

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
    std::vector<double> w(t.size(), 0.0);
    if (t.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        double h = t[i + 1] - t[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

}  // namespace

Estimate young_eval(const Ensemble& ens, const Basis& basis, const FieldFunction& f, const WeightFunction& phi,
                    int grid_M) {
    if (ens.probe_times.empty()) throw std::invalid_argument("young_eval needs a probe schedule");
    std::vector<double> times = ens.probe_times;
    std::sort(times.begin(), times.end());
    auto tw = trapezoid_weights(times);
    GridEvaluator grid(basis, grid_M);
    const std::size_t G = grid.points();

    std::vector<Eigen::VectorXd> points(G);
    for (std::size_t g = 0; g < G; ++g) points[g] = grid.point(g);
    std::vector<std::vector<double>> phiv(times.size(), std::vector<double>(G));
    for (std::size_t q = 0; q < times.size(); ++q)
        for (std::size_t g = 0; g < G; ++g) phiv[q][g] = phi(times[q], points[g]);

    std::vector<double> per_member(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m) {
        double acc = 0.0;
        for (std::size_t q = 0; q < times.size(); ++q) {
            const auto& tr = ens.members[m];
            Eigen::MatrixXd u = grid.values(tr.states[tr.index_of_time(times[q])]);
            double s = 0.0;
            for (std::size_t g = 0; g < G; ++g) s += phiv[q][g] * f(u.row(static_cast<Eigen::Index>(g)).transpose());
            acc += tw[q] * grid.weight() * s;
        }
        per_member[m] = acc;
    }
    return mean_se(per_member);
}

Eigen::MatrixXd young_pointwise(const Ensemble& ens, const Basis& basis, double t, int grid_M,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f) {
    if (ens.size() == 0) throw std::invalid_argument("empty ensemble");
    GridEvaluator grid(basis, grid_M);
    const auto G = static_cast<Eigen::Index>(grid.points());
    Eigen::MatrixXd acc;
    for (std::size_t m = 0; m < ens.size(); ++m) {
        const auto& tr = ens.members[m];
        Eigen::MatrixXd u = grid.values(tr.states[tr.index_of_time(t)]);
        for (Eigen::Index g = 0; g < G; ++g) {
            Eigen::VectorXd v = f(u.row(g).transpose());
            if (acc.size() == 0) acc = Eigen::MatrixXd::Zero(G, v.size());
            acc.row(g) += v.transpose();
        }
    }
    return acc / static_cast<double>(ens.size());
}

MomentReport moment_report(const Ensemble& ens, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("moment exponent must be >= 2");
    MomentReport r;
    r.p = p;
    std::vector<double> sup(ens.size()), visc(ens.size()), func(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m) {
        const auto& tr = ens.members[m];
        sup[m] = std::pow(2.0 * tr.sup_kinetic, 0.5 * p);
        double gi = tr.grad_integral.back();
        visc[m] = tr.nu * std::pow(gi, 0.5 * p);
        func[m] = tr.nu * gi;
    }
    r.sup_moment = mean_se(sup);
    r.viscous_moment = mean_se(visc);
    r.viscous_functional = mean_se(func);
    return r;
}

}  // namespace sgns
