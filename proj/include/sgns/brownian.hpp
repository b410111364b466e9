#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace sgns {

// A Brownian path on K modes, sampled at dt = root_dt / 2^level. Root
// increments are drawn directly; finer levels come from Levy midpoint
// refinement inside each root step, so a path at level L+1 sums pairwise to
// the path at level L with the same seed.
struct PathSpec {
    std::uint64_t seed = 0;
    double root_dt = 1e-3;
    int level = 0;
    std::size_t n_steps = 0;
    std::size_t modes = 0;

    double dt() const;
    std::size_t substeps() const { return std::size_t{1} << level; }
    double horizon() const { return dt() * static_cast<double>(n_steps); }
    PathSpec refined(int extra_levels) const;
    bool operator==(const PathSpec&) const = default;
};

// Builds a path spec that covers [0, T] with step dt = root_dt / 2^level.
PathSpec make_path(std::uint64_t seed, double T, double root_dt, int level, std::size_t modes);

class BrownianPath {
public:
    explicit BrownianPath(const PathSpec& spec);

    const PathSpec& spec() const { return spec_; }

    // Increments of step n (length K), valid until the next call.
    const double* increment(std::size_t n);

    Eigen::MatrixXd materialize();

private:
    void fill_block(std::size_t root);

    PathSpec spec_;
    std::size_t cached_root_ = static_cast<std::size_t>(-1);
    std::vector<double> block_;  // substeps x K
};

}  // namespace sgns
