#include "sgns/brownian.hpp"

#include <cmath>
#include <stdexcept>

#include "sgns/rng.hpp"

namespace sgns {

namespace {

constexpr std::uint32_t kBrownianDomain = 0x42u << 24;

}

double PathSpec::dt() const { return std::ldexp(root_dt, -level); }

PathSpec PathSpec::refined(int extra_levels) const {
    PathSpec p = *this;
    p.level += extra_levels;
    p.n_steps = n_steps << extra_levels;
    return p;
}

PathSpec make_path(std::uint64_t seed, double T, double root_dt, int level, std::size_t modes) {
    if (!(root_dt > 0.0)) throw std::invalid_argument("root step must be positive");
    if (level < 0 || level > 30) throw std::invalid_argument("refinement level must lie in [0, 30]");
    if (!(T >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
    double dt = std::ldexp(root_dt, -level);
    double steps = T / dt;
    double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
        throw std::invalid_argument("horizon is not an integer multiple of the step size");
    PathSpec p;
    p.seed = seed;
    p.root_dt = root_dt;
    p.level = level;
    p.n_steps = static_cast<std::size_t>(rounded);
    p.modes = modes;
    return p;
}

BrownianPath::BrownianPath(const PathSpec& spec) : spec_(spec) {
    if (spec.level < 0 || spec.level > 30) throw std::invalid_argument("refinement level must lie in [0, 30]");
    block_.assign(spec.substeps() * spec.modes, 0.0);
}

void BrownianPath::fill_block(std::size_t root) {
    const std::size_t K = spec_.modes;
    const std::size_t S = spec_.substeps();
    std::vector<double> cur(1), next;
    for (std::size_t l = 0; l < K; ++l) {
        cur.assign(1, std::sqrt(spec_.root_dt) *
                          counter_normal(spec_.seed, kBrownianDomain, std::uint32_t(l), std::uint32_t(root),
                                         std::uint32_t(root >> 32)));
        double h = spec_.root_dt;
        for (int lev = 1; lev <= spec_.level; ++lev) {
            next.resize(2 * cur.size());
            for (std::size_t q = 0; q < cur.size(); ++q) {
                // midpoint given the interval increment: mean D/2, std sqrt(h)/2
                double z = counter_normal(spec_.seed, kBrownianDomain | std::uint32_t(lev), std::uint32_t(l),
                                          std::uint32_t(root), std::uint32_t(q));
                double left = 0.5 * cur[q] + 0.5 * std::sqrt(h) * z;
                next[2 * q] = left;
                next[2 * q + 1] = cur[q] - left;
            }
            cur.swap(next);
            h *= 0.5;
        }
        for (std::size_t s = 0; s < S; ++s) block_[s * K + l] = cur[s];
    }
    cached_root_ = root;
}

const double* BrownianPath::increment(std::size_t n) {
    if (n >= spec_.n_steps) throw std::out_of_range("Brownian step index out of range");
    std::size_t root = n >> spec_.level;
    if (root != cached_root_) fill_block(root);
    return block_.data() + (n & (spec_.substeps() - 1)) * spec_.modes;
}

Eigen::MatrixXd BrownianPath::materialize() {
    Eigen::MatrixXd out(spec_.n_steps, spec_.modes);
    for (std::size_t n = 0; n < spec_.n_steps; ++n) {
        const double* dw = increment(n);
        for (std::size_t l = 0; l < spec_.modes; ++l) out(n, l) = dw[l];
    }
    return out;
}

}  // namespace sgns
