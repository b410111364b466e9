#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "quadrature_oracle.hpp"
#include "sgns/triad.hpp"

using namespace sgns;

namespace {

Eigen::VectorXd random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd a(n);
    for (auto& x : a) x = g(rng);
    return a;
}

}  // namespace

TEST_CASE("concrete 2D triad matches quadrature") {
    Basis b = Basis::build(2, 2);
    auto i = b.find({1, 0, 0}, 0, Phase::Cos);
    auto k = b.find({0, 1, 0}, 0, Phase::Sin);
    auto j = b.find({1, 1, 0}, 0, Phase::Sin);
    REQUIRE((i && k && j));
    ConvectionTensor t = convection_tensor(b);
    double q = oracle::quad_triad(2, b.norm(), b.mode(*i), b.mode(*k), b.mode(*j), 24);
    CHECK(std::abs(t.at(*i, *k, *j) - q) <= 1e-12);
    CHECK(std::abs(triad_integral(2, b.norm(), b.mode(*i), b.mode(*k), b.mode(*j)) - q) <= 1e-12);
    CHECK(q != 0.0);
}

TEST_CASE("closed-form triads agree with quadrature on every mode triple") {
    for (int dim : {2, 3}) {
        Basis b = Basis::build(dim, 1);
        const auto& m = b.modes();
        double worst = 0.0;
        for (std::size_t a = 0; a < m.size(); a += 3)
            for (std::size_t c = 0; c < m.size(); ++c)
                for (std::size_t e = 0; e < m.size(); e += 2) {
                    double q = oracle::quad_triad(dim, b.norm(), m[a], m[c], m[e], 6);
                    worst = std::max(worst, std::abs(triad_integral(dim, b.norm(), m[a], m[c], m[e]) - q));
                }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("stored entries are skew in the last two indices") {
    Basis b = Basis::build(2, 3);
    ConvectionTensor t = convection_tensor(b);
    REQUIRE(t.nnz() > 0);
    for (const auto& e : t.entries()) CHECK(e.value + t.at(e.i, e.j, e.k) == 0.0);
}

TEST_CASE("entries are sorted by (j, i, k)") {
    ConvectionTensor t = convection_tensor(Basis::build(3, 1));
    const auto& es = t.entries();
    for (std::size_t n = 1; n < es.size(); ++n) {
        auto key = [](const TriadEntry& e) { return std::tuple(e.j, e.i, e.k); };
        CHECK(key(es[n - 1]) < key(es[n]));
    }
}

TEST_CASE("sparse storage matches the dense oracle exactly on its support") {
    Basis b = Basis::build(2, 2);
    const std::size_t N = b.size();
    ConvectionTensor t = convection_tensor(b);
    std::vector<double> dense = oracle::dense_convection(b, 3 * b.cutoff() + 3);
    std::size_t dense_nonzero = 0;
    double absent = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t j = 0; j < N; ++j) {
                double d = dense[(i * N + k) * N + j];
                if (std::abs(d) > 1e-12) ++dense_nonzero;
                if (t.at(i, k, j) == 0.0) absent = std::max(absent, std::abs(d));
                else CHECK(std::abs(t.at(i, k, j) - d) <= 1e-12);
            }
    CHECK(absent <= 1e-12);
    CHECK(t.nnz() == dense_nonzero);
}

TEST_CASE("energy conservation of the convection term") {
    std::mt19937_64 rng(17);
    for (int dim : {2, 3}) {
        Basis b = Basis::build(dim, 2);
        ConvectionTensor t = convection_tensor(b);
        for (int r = 0; r < 100; ++r) {
            Eigen::VectorXd a = random_vector(b.size(), rng);
            CHECK(std::abs(a.dot(t.contract(a))) <= 1e-12 * std::pow(a.norm(), 3));
        }
    }
}

TEST_CASE("sparse contraction equals dense contraction") {
    std::mt19937_64 rng(23);
    for (int cutoff : {1, 2, 3}) {
        Basis b = Basis::build(2, cutoff);
        ConvectionTensor t = convection_tensor(b);
        std::vector<double> dense = oracle::dense_convection(b, 3 * cutoff + 3);
        Eigen::VectorXd a = random_vector(b.size(), rng);
        Eigen::VectorXd s = t.contract(a);
        Eigen::VectorXd d = oracle::dense_contract(dense, b.size(), a);
        CHECK((s - d).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("a single mode does not interact with itself") {
    Basis b = Basis::build(2, 2);
    ConvectionTensor t = convection_tensor(b);
    for (std::size_t m = 0; m < b.size(); ++m) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(b.size());
        e[m] = 1.0;
        CHECK(t.contract(e).isZero(0.0));
    }
}

TEST_CASE("triad partners satisfy the wavevector constraint") {
    WaveVector ka{1, 0, 0}, kb{0, 1, 0};
    auto qs = triad_partners(ka, kb);
    REQUIRE(qs.size() == 2);
    for (const auto& q : qs) {
        auto [c, sign] = canonicalize(q);
        CHECK(c == q);
        CHECK(sign == 1);
        CHECK(dot(q, q) == 2);
    }
    // Parallel wavevectors only produce partners on the same line.
    for (const auto& q : triad_partners({1, 0, 0}, {2, 0, 0})) CHECK(q[1] == 0);
}

TEST_CASE("stored entry count against dense enumeration") {
    std::vector<double> n, nnz;
    for (int cutoff : {1, 2, 3}) {
        Basis b = Basis::build(2, cutoff);
        ConvectionTensor t = convection_tensor(b);
        n.push_back(static_cast<double>(b.size()));
        nnz.push_back(static_cast<double>(t.nnz()));
        CHECK(t.nnz() < b.size() * b.size() * b.size() / 4);
    }
    // Each (i, k) pair couples to a bounded number of j, so growth stays
    // well below the dense N^3.
    double growth = std::log(nnz[2] / nnz[0]) / std::log(n[2] / n[0]);
    CHECK(growth < 2.5);
}

TEST_CASE("Frobenius norm matches the entry sum") {
    ConvectionTensor t = convection_tensor(Basis::build(2, 2));
    double s = 0.0;
    for (const auto& e : t.entries()) s += e.value * e.value;
    CHECK(t.frobenius_norm() == Catch::Approx(std::sqrt(s)).epsilon(1e-14));
}
