#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sgns/basis.hpp"
#include "sgns/sde.hpp"

namespace sgns {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

// Pairwise (arity-2 tree) summation in index order; the result does not
// depend on how the members were scheduled.
double tree_sum(const std::vector<double>& x);
Estimate mean_se(const std::vector<double>& x);

std::uint64_t member_seed(std::uint64_t base_seed, std::size_t index);

using InitialSampler = std::function<Eigen::VectorXd(std::size_t index, std::uint64_t seed)>;

InitialSampler fixed_initial(const Eigen::VectorXd& a0);
// Gaussian coefficients with variance amplitude^2 / (1 + |k|^2)^decay,
// drawn from the member seed.
InitialSampler gaussian_initial(const Basis& basis, double amplitude, double decay);
Eigen::VectorXd smooth_random_field(const Basis& basis, std::uint64_t seed, double l2_norm, double decay);

struct EnsembleConfig {
    double T = 1.0;
    double root_dt = 1e-3;
    int level = 0;
    Scheme scheme = Scheme::EulerMaruyama;
    std::size_t save_stride = 0;
    std::vector<double> probe_times;
    bool keep_integrals = false;
    GuardPolicy guard = GuardPolicy::Enforce;
    unsigned threads = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t config_hash = 0;
};

struct Ensemble {
    std::uint64_t config_hash = 0;
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> probe_times;
    std::vector<Trajectory> members;

    std::size_t size() const { return members.size(); }
    std::vector<Eigen::VectorXd> states_at(double t) const;
};

unsigned resolve_threads(unsigned requested);

// Runs fn(i) for i in [0, count) on a worker pool; rethrows the exception of
// the lowest failing index after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

Ensemble run_ensemble(const GalerkinSystem& sys, const InitialSampler& initial, std::size_t M,
                      const EnsembleConfig& cfg);

using FieldFunction = std::function<double(const Eigen::VectorXd& u)>;
using WeightFunction = std::function<double(double t, const Eigen::VectorXd& x)>;

// Monte-Carlo estimate of E[ int int phi(t,x) f(u(t,x)) dx dt ] over the
// probe schedule (trapezoid in time, grid quadrature in space).
Estimate young_eval(const Ensemble& ens, const Basis& basis, const FieldFunction& f, const WeightFunction& phi,
                    int grid_M);

// Empirical Young-measure average of a vector-valued f at every grid point
// for the probe time t; returns G x q.
Eigen::MatrixXd young_pointwise(const Ensemble& ens, const Basis& basis, double t, int grid_M,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f);

struct MomentReport {
    double p = 2.0;
    Estimate sup_moment;      // E[ (sup_t |u|^2)^{p/2} ]
    Estimate viscous_moment;  // nu E[ (int |grad u|^2)^{p/2} ]
    Estimate viscous_functional;  // nu E[ int |grad u|^2 ]
};

MomentReport moment_report(const Ensemble& ens, double p);

}  // namespace sgns
