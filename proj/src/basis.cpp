#include "sgns/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgns {

int dot(const WaveVector& a, const WaveVector& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

int max_abs(const WaveVector& k) {
    return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

std::pair<WaveVector, int> canonicalize(const WaveVector& k) {
    for (int c = 0; c < 3; ++c) {
        if (k[c] > 0) return {k, 1};
        if (k[c] < 0) return {WaveVector{-k[0], -k[1], -k[2]}, -1};
    }
    return {k, 0};
}

std::int64_t wavevector_key(const WaveVector& k) {
    constexpr std::int64_t span = 1 << 20;
    constexpr std::int64_t off = span / 2;
    return ((k[0] + off) * span + (k[1] + off)) * span + (k[2] + off);
}

namespace {

std::array<double, 3> normalized(std::array<double, 3> v) {
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

std::vector<std::array<double, 3>> polarizations(int dim, const WaveVector& k) {
    if (dim == 2) {
        return {normalized({-static_cast<double>(k[1]), static_cast<double>(k[0]), 0.0})};
    }
    std::array<double, 3> kd{double(k[0]), double(k[1]), double(k[2])};
    // reference axis: z unless k is parallel to it
    std::array<double, 3> ref{0.0, 0.0, 1.0};
    if (k[0] == 0 && k[1] == 0) ref = {1.0, 0.0, 0.0};
    auto e1 = normalized(cross(kd, ref));
    auto e2 = normalized(cross(kd, e1));
    return {e1, e2};
}

Basis Basis::build(int dim, int cutoff) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("basis dimension must be 2 or 3, got " + std::to_string(dim));
    if (cutoff < 1)
        throw std::invalid_argument("basis cutoff must be >= 1, got " + std::to_string(cutoff));

    Basis b;
    b.dim_ = dim;
    b.cutoff_ = cutoff;
    b.norm_ = std::sqrt(2.0 / std::pow(2.0 * std::numbers::pi, dim));

    const int zr = dim == 3 ? cutoff : 0;
    for (int x = -cutoff; x <= cutoff; ++x)
        for (int y = -cutoff; y <= cutoff; ++y)
            for (int z = -zr; z <= zr; ++z) {
                WaveVector k{x, y, z};
                auto [c, s] = canonicalize(k);
                if (s == 1) b.wavevectors_.push_back(c);
            }
    std::sort(b.wavevectors_.begin(), b.wavevectors_.end(),
              [](const WaveVector& p, const WaveVector& q) {
                  int np = dot(p, p), nq = dot(q, q);
                  if (np != nq) return np < nq;
                  return p > q;
              });

    for (const auto& k : b.wavevectors_) {
        auto pols = sgns::polarizations(dim, k);
        b.lookup_[wavevector_key(k)] = b.modes_.size();
        for (int p = 0; p < static_cast<int>(pols.size()); ++p)
            for (Phase ph : {Phase::Cos, Phase::Sin})
                b.modes_.push_back(Mode{k, p, ph, pols[p], dot(k, k)});
    }
    return b;
}

double Basis::volume() const { return std::pow(2.0 * std::numbers::pi, dim_); }

std::optional<std::size_t> Basis::first_index(const WaveVector& k) const {
    auto it = lookup_.find(wavevector_key(k));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Basis::find(const WaveVector& k, int pol, Phase phase) const {
    if (pol < 0 || pol >= polarizations()) return std::nullopt;
    auto first = first_index(k);
    if (!first) return std::nullopt;
    return *first + 2 * static_cast<std::size_t>(pol) + static_cast<std::size_t>(phase);
}

Eigen::VectorXd Basis::laplacian_eigenvalues() const {
    Eigen::VectorXd lap(size());
    for (std::size_t i = 0; i < size(); ++i) lap[i] = modes_[i].k2;
    return lap;
}

int Basis::max_k2() const {
    int m = 0;
    for (const auto& md : modes_) m = std::max(m, md.k2);
    return m;
}

FourierField FourierField::zeros(int dim, const std::vector<WaveVector>& k) {
    FourierField f;
    f.dim = dim;
    f.k = k;
    f.mean = Eigen::VectorXd::Zero(dim);
    f.cos_coef.assign(k.size(), Eigen::VectorXd::Zero(dim));
    f.sin_coef.assign(k.size(), Eigen::VectorXd::Zero(dim));
    return f;
}

Eigen::VectorXd leray_project(const Basis& basis, const FourierField& field) {
    const auto& ks = basis.wavevectors();
    if (field.dim != basis.dim() || field.k != ks || field.cos_coef.size() != ks.size() ||
        field.sin_coef.size() != ks.size())
        throw std::invalid_argument("leray_project: field is not indexed by the basis wavevectors");

    // <A cos(k.x), c p cos(k.x)> = (A.p) / c, likewise for sin.
    Eigen::VectorXd a(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Mode& m = basis.mode(i);
        std::size_t w = i / (2 * static_cast<std::size_t>(basis.polarizations()));
        const Eigen::VectorXd& A = m.phase == Phase::Cos ? field.cos_coef[w] : field.sin_coef[w];
        double s = 0.0;
        for (int c = 0; c < basis.dim(); ++c) s += A[c] * m.p[c];
        a[i] = s / basis.norm();
    }
    return a;
}

FourierField to_fourier(const Basis& basis, const Eigen::VectorXd& a) {
    if (static_cast<std::size_t>(a.size()) != basis.size())
        throw std::invalid_argument("to_fourier: coefficient length mismatch");
    FourierField f = FourierField::zeros(basis.dim(), basis.wavevectors());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Mode& m = basis.mode(i);
        std::size_t w = i / (2 * static_cast<std::size_t>(basis.polarizations()));
        Eigen::VectorXd& A = m.phase == Phase::Cos ? f.cos_coef[w] : f.sin_coef[w];
        for (int c = 0; c < basis.dim(); ++c) A[c] += basis.norm() * a[i] * m.p[c];
    }
    return f;
}

int min_exact_grid(const Basis& basis) { return 2 * basis.cutoff() + 2; }

Eigen::VectorXd project_field(const Basis& basis, const GridSamples& samples) {
    const int d = basis.dim();
    const int M = samples.M;
    if (samples.dim != d) throw std::invalid_argument("project_field: dimension mismatch");
    if (M < min_exact_grid(basis))
        throw std::invalid_argument("project_field: grid of " + std::to_string(M) +
                                    " points per axis under-resolves cutoff " +
                                    std::to_string(basis.cutoff()) + " (need >= " +
                                    std::to_string(min_exact_grid(basis)) + ")");
    std::size_t G = 1;
    for (int c = 0; c < d; ++c) G *= static_cast<std::size_t>(M);
    if (static_cast<std::size_t>(samples.values.rows()) != G || samples.values.cols() != d)
        throw std::invalid_argument("project_field: sample array has wrong shape");

    const double h = std::pow(2.0 * std::numbers::pi / M, d);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(basis.size());
    std::array<int, 3> g{0, 0, 0};
    for (std::size_t idx = 0; idx < G; ++idx) {
        std::size_t r = idx;
        for (int c = d - 1; c >= 0; --c) {
            g[c] = static_cast<int>(r % M);
            r /= M;
        }
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const Mode& m = basis.mode(i);
            long kx = 0;
            for (int c = 0; c < d; ++c) kx += static_cast<long>(m.k[c]) * g[c];
            double theta = 2.0 * std::numbers::pi * static_cast<double>(((kx % M) + M) % M) / M;
            double f = m.phase == Phase::Cos ? std::cos(theta) : std::sin(theta);
            double pu = 0.0;
            for (int c = 0; c < d; ++c) pu += m.p[c] * samples.values(idx, c);
            a[i] += h * basis.norm() * f * pu;
        }
    }
    return a;
}

}  // namespace sgns
