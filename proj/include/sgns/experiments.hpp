#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgns/diagnostics.hpp"
#include "sgns/ensemble.hpp"
#include "sgns/sde.hpp"

namespace sgns {

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class Coupling { Shared, Independent };

struct SweepPlan {
    std::vector<double> nu;
    Coupling coupling = Coupling::Shared;
    std::size_t members = 16;
    EnsembleConfig ensemble;
    double moment_p = 4.0;
    bool gap_battery = true;
    std::uint64_t library_seed = 7;
    // Hash of the full configuration at each axis value.
    std::function<std::uint64_t(double nu)> point_hash;
};

struct SweepPoint {
    double nu = 0.0;
    std::uint64_t config_hash = 0;
    MomentReport moments;           // at plan.moment_p
    Estimate viscous_functional;    // nu E int |grad u|^2
    double weighted_term = 0.0;     // sqrt(nu) (nu E int |grad u|^2)^{1/2} |grad phi|
    Estimate energy_residual;       // over [0, T], per member
    double cauchy_next = 0.0;       // mean |u_nu(T) - u_nu'(T)| to the next axis value
    std::size_t blowups = 0;
};

struct SweepReport {
    std::vector<SweepPoint> points;
    double fitted_exponent = 0.0;
    double moment_ratio = 0.0;
    bool viscous_bounded = true;
    std::vector<std::string> gap_names;
    std::vector<double> gaps;  // battery on the smallest-nu member
};

SweepReport viscosity_sweep(const SweepPlan& plan, const GalerkinSystem& tmpl, const InitialSampler& initial,
                            const Eigen::VectorXd& phi);

struct OrderReport {
    std::vector<double> dt;
    std::vector<Estimate> error;  // E |a_dt(T) - a_ref(T)|
    double slope = 0.0;
    double reference_dt = 0.0;
};

// Strong error against a reference two dyadic levels finer on the same paths.
OrderReport order_study(const GalerkinSystem& sys, Scheme scheme, const InitialSampler& initial,
                        const std::vector<int>& levels, double root_dt, double T, std::size_t M,
                        std::uint64_t base_seed, unsigned threads = 0, int reference_extra = 2);

struct KernelBenchmarkRow {
    int cutoff = 0;
    std::size_t N = 0;
    std::size_t nnz = 0;
    std::size_t reps = 0;
    double seconds = 0.0;
    double contractions_per_second = 0.0;
    double bytes_per_contraction = 0.0;
};

KernelBenchmarkRow kernel_benchmark(const GalerkinSystem& sys, std::size_t reps);
std::vector<KernelBenchmarkRow> kernel_benchmark(int dim, const std::vector<int>& cutoffs, std::size_t reps);

}  // namespace sgns
