#include "sgns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgns {

GridEvaluator::GridEvaluator(const Basis& basis, int M) : dim_(basis.dim()), M_(M) {
    if (M < 1) throw std::invalid_argument("grid resolution must be positive");
    const int d = dim_;
    std::size_t G = 1;
    for (int c = 0; c < d; ++c) G *= static_cast<std::size_t>(M);
    const auto N = static_cast<Eigen::Index>(basis.size());
    weight_ = std::pow(2.0 * std::numbers::pi / M, d);
    trig_.resize(static_cast<Eigen::Index>(G), N);
    dtrig_.resize(static_cast<Eigen::Index>(G), N);
    std::array<int, 3> g{0, 0, 0};
    for (std::size_t idx = 0; idx < G; ++idx) {
        std::size_t r = idx;
        for (int c = d - 1; c >= 0; --c) {
            g[c] = static_cast<int>(r % M);
            r /= M;
        }
        for (Eigen::Index m = 0; m < N; ++m) {
            const Mode& md = basis.mode(static_cast<std::size_t>(m));
            long kx = 0;
            for (int c = 0; c < d; ++c) kx += static_cast<long>(md.k[c]) * g[c];
            double th = 2.0 * std::numbers::pi * static_cast<double>(((kx % M) + M) % M) / M;
            const auto row = static_cast<Eigen::Index>(idx);
            if (md.phase == Phase::Cos) {
                trig_(row, m) = std::cos(th);
                dtrig_(row, m) = -std::sin(th);
            } else {
                trig_(row, m) = std::sin(th);
                dtrig_(row, m) = std::cos(th);
            }
        }
    }
    pol_.resize(N, d);
    pk_.resize(N, d * d);
    for (Eigen::Index m = 0; m < N; ++m) {
        const Mode& md = basis.mode(static_cast<std::size_t>(m));
        for (int c = 0; c < d; ++c) {
            pol_(m, c) = basis.norm() * md.p[c];
            for (int e = 0; e < d; ++e) pk_(m, c * d + e) = basis.norm() * md.p[c] * md.k[e];
        }
    }
}

Eigen::MatrixXd GridEvaluator::values(const Eigen::VectorXd& a) const {
    if (a.size() != trig_.cols()) throw std::invalid_argument("coefficient length does not match the grid basis");
    return trig_ * (a.asDiagonal() * pol_);
}

Eigen::MatrixXd GridEvaluator::gradients(const Eigen::VectorXd& a) const {
    if (a.size() != trig_.cols()) throw std::invalid_argument("coefficient length does not match the grid basis");
    return dtrig_ * (a.asDiagonal() * pk_);
}

Eigen::VectorXd GridEvaluator::point(std::size_t g) const {
    Eigen::VectorXd x(dim_);
    for (int c = dim_ - 1; c >= 0; --c) {
        x[c] = 2.0 * std::numbers::pi * static_cast<double>(g % M_) / M_;
        g /= M_;
    }
    return x;
}

double neg_part_spectral_sup(int dim, const Eigen::MatrixXd& grads) {
    if (grads.cols() != dim * dim) throw std::invalid_argument("gradient samples must have d*d columns");
    double worst = 0.0;
    for (Eigen::Index g = 0; g < grads.rows(); ++g) {
        double lmin;
        if (dim == 2) {
            double a = grads(g, 0), b = 0.5 * (grads(g, 1) + grads(g, 2)), c = grads(g, 3);
            double h = 0.5 * (a - c);
            lmin = 0.5 * (a + c) - std::sqrt(h * h + b * b);
        } else {
            Eigen::Matrix3d m;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) m(i, j) = 0.5 * (grads(g, i * 3 + j) + grads(g, j * 3 + i));
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
            lmin = es.eigenvalues()[0];
        }
        worst = std::max(worst, -lmin);
    }
    return worst;
}

NegPartWeight::NegPartWeight(const Basis& basis)
    : coarse_(basis, min_exact_grid(basis)), fine_(basis, 2 * min_exact_grid(basis)) {}

double NegPartWeight::operator()(const Eigen::VectorXd& a) const {
    int d = coarse_.dim();
    double s = std::max(neg_part_spectral_sup(d, coarse_.gradients(a)), neg_part_spectral_sup(d, fine_.gradients(a)));
    return 2.0 * s;
}

}  // namespace sgns
