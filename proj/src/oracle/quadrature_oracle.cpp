#include "quadrature_oracle.hpp"

#include <cmath>
#include <numbers>

namespace sgns::oracle {

namespace {

std::size_t grid_size(int dim, int M) {
    std::size_t G = 1;
    for (int c = 0; c < dim; ++c) G *= static_cast<std::size_t>(M);
    return G;
}

std::array<double, 3> grid_point(int dim, int M, std::size_t idx) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int c = dim - 1; c >= 0; --c) {
        x[c] = 2.0 * std::numbers::pi * static_cast<double>(idx % M) / M;
        idx /= M;
    }
    return x;
}

}  // namespace

ModeTable tabulate(int dim, double norm, const std::vector<Mode>& modes, int M) {
    ModeTable t;
    t.dim = dim;
    t.M = M;
    t.weight = std::pow(2.0 * std::numbers::pi / M, dim);
    const std::size_t G = grid_size(dim, M);
    for (const Mode& m : modes) {
        Eigen::MatrixXd v(G, dim), g(G, dim * dim);
        for (std::size_t idx = 0; idx < G; ++idx) {
            auto x = grid_point(dim, M, idx);
            double th = 0.0;
            for (int c = 0; c < dim; ++c) th += m.k[c] * x[c];
            double f = m.phase == Phase::Cos ? std::cos(th) : std::sin(th);
            double df = m.phase == Phase::Cos ? -std::sin(th) : std::cos(th);
            for (int c = 0; c < dim; ++c) {
                v(idx, c) = norm * m.p[c] * f;
                for (int e = 0; e < dim; ++e) g(idx, c * dim + e) = norm * m.p[c] * m.k[e] * df;
            }
        }
        t.value.push_back(std::move(v));
        t.grad.push_back(std::move(g));
    }
    return t;
}

ModeTable tabulate(const Basis& basis, int M) {
    return tabulate(basis.dim(), basis.norm(), basis.modes(), M);
}

Eigen::MatrixXd gram(const Basis& basis, int M) {
    ModeTable t = tabulate(basis, M);
    const std::size_t n = basis.size();
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g(i, j) = t.weight * (t.value[i].array() * t.value[j].array()).sum();
    return g;
}

namespace {

// rows: (sigma . grad) v evaluated on the grid, G x d
Eigen::MatrixXd advect(const ModeTable& t, const Eigen::MatrixXd& sigma, std::size_t k) {
    const int d = t.dim;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sigma.rows(), d);
    for (Eigen::Index g = 0; g < sigma.rows(); ++g)
        for (int c = 0; c < d; ++c)
            for (int e = 0; e < d; ++e) out(g, c) += sigma(g, e) * t.grad[k](g, c * d + e);
    return out;
}

}  // namespace

std::vector<double> dense_convection(const Basis& basis, int M) {
    ModeTable t = tabulate(basis, M);
    const std::size_t n = basis.size();
    std::vector<double> b(n * n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            Eigen::MatrixXd w = advect(t, t.value[i], k);
            for (std::size_t j = 0; j < n; ++j)
                b[(i * n + k) * n + j] = t.weight * (w.array() * t.value[j].array()).sum();
        }
    return b;
}

Eigen::VectorXd dense_contract(const std::vector<double>& b, std::size_t n, const Eigen::VectorXd& a) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) out[j] += b[(i * n + k) * n + j] * a[i] * a[k];
    return out;
}

Eigen::MatrixXd dense_transport(const Basis& basis, const std::vector<Mode>& sigma_modes,
                                const std::vector<double>& sigma_coef, int M) {
    ModeTable t = tabulate(basis, M);
    ModeTable s = tabulate(basis.dim(), basis.norm(), sigma_modes, M);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(t.value.empty() ? 0 : t.value[0].rows(), basis.dim());
    for (std::size_t m = 0; m < sigma_modes.size(); ++m) sigma += sigma_coef[m] * s.value[m];
    const std::size_t n = basis.size();
    Eigen::MatrixXd z(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd w = advect(t, sigma, i);
        for (std::size_t j = 0; j < n; ++j) z(j, i) = t.weight * (w.array() * t.value[j].array()).sum();
    }
    return z;
}

double quad_triad(int dim, double norm, const Mode& a, const Mode& b, const Mode& c, int M) {
    ModeTable t = tabulate(dim, norm, {a, b, c}, M);
    Eigen::MatrixXd w = advect(t, t.value[0], 1);
    return t.weight * (w.array() * t.value[2].array()).sum();
}

}  // namespace sgns::oracle
