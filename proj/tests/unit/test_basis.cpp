#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "quadrature_oracle.hpp"
#include "sgns/basis.hpp"
#include "sgns/grid.hpp"

using namespace sgns;

namespace {

Eigen::VectorXd random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd a(n);
    for (auto& x : a) x = g(rng);
    return a;
}

GridSamples sample(const Basis& basis, const Eigen::VectorXd& a, int M) {
    GridEvaluator ev(basis, M);
    return GridSamples{basis.dim(), M, ev.values(a)};
}

}  // namespace

TEST_CASE("cutoff 1 in 2D has eight modes on four wavevectors") {
    Basis b = Basis::build(2, 1);
    REQUIRE(b.size() == 8);
    std::set<std::pair<int, int>> ks;
    for (const auto& k : b.wavevectors()) ks.insert({k[0], k[1]});
    CHECK(ks == std::set<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 1}, {1, -1}});
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.mode(i).phase == (i % 2 == 0 ? Phase::Cos : Phase::Sin));
}

TEST_CASE("invalid dimension or cutoff is rejected") {
    CHECK_THROWS_AS(Basis::build(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(Basis::build(4, 2), std::invalid_argument);
    CHECK_THROWS_AS(Basis::build(1, 2), std::invalid_argument);
}

TEST_CASE("mode ordering is by |k|^2 and stable across builds") {
    for (int dim : {2, 3}) {
        Basis a = Basis::build(dim, 2), b = Basis::build(dim, 2);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.mode(i).k == b.mode(i).k);
            CHECK(a.mode(i).pol == b.mode(i).pol);
            if (i > 0) CHECK(a.mode(i - 1).k2 <= a.mode(i).k2);
        }
    }
    // 3D carries two polarizations per wavevector.
    Basis b3 = Basis::build(3, 1);
    CHECK(b3.size() == 13 * 2 * 2);
}

TEST_CASE("every stored wavevector is canonical and within the cutoff") {
    Basis b = Basis::build(3, 2);
    for (const auto& k : b.wavevectors()) {
        auto [c, sign] = canonicalize(k);
        CHECK(sign == 1);
        CHECK(c == k);
        CHECK(max_abs(k) <= 2);
    }
}

TEST_CASE("Gram matrix is the identity under quadrature") {
    for (int dim : {2, 3}) {
        for (int cutoff : {1, 2}) {
            Basis b = Basis::build(dim, cutoff);
            Eigen::MatrixXd G = oracle::gram(b, 2 * cutoff + 2);
            Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b.size(), b.size());
            CHECK((G - I).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    Basis b = Basis::build(2, 6);
    Eigen::MatrixXd G = oracle::gram(b, 14);
    CHECK((G - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("polarizations are unit vectors orthogonal to k") {
    Basis b = Basis::build(3, 2);
    for (const auto& m : b.modes()) {
        double pk = 0.0, pp = 0.0;
        for (int c = 0; c < 3; ++c) {
            pk += m.p[c] * m.k[c];
            pp += m.p[c] * m.p[c];
        }
        CHECK(std::abs(pk) <= 1e-15);
        CHECK(pp == Catch::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("Laplacian eigenvalues are |k|^2") {
    Basis b = Basis::build(2, 2);
    Eigen::VectorXd lap = b.laplacian_eigenvalues();
    auto i10 = b.find({1, 0, 0}, 0, Phase::Cos);
    auto i11 = b.find({1, 1, 0}, 0, Phase::Sin);
    REQUIRE(i10);
    REQUIRE(i11);
    CHECK(lap[*i10] == 1.0);
    CHECK(lap[*i11] == 2.0);
    CHECK(b.max_k2() == 8);
}

TEST_CASE("project_field returns coordinates of sampled fields") {
    Basis b = Basis::build(2, 3);
    const int M = min_exact_grid(b);

    SECTION("a single mode projects to its unit vector") {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(b.size());
        e[3] = 1.0;
        Eigen::VectorXd a = project_field(b, sample(b, e, M));
        CHECK((a - e).cwiseAbs().maxCoeff() <= 1e-13);
    }
    SECTION("zero field") {
        GridSamples z{2, M, Eigen::MatrixXd::Zero(M * M, 2)};
        CHECK(project_field(b, z).isZero(0.0));
    }
    SECTION("random round trip") {
        Eigen::VectorXd a = random_vector(b.size(), 11);
        Eigen::VectorXd back = project_field(b, sample(b, a, M));
        CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SECTION("under-resolved grid is rejected") {
        GridSamples s = sample(b, Eigen::VectorXd::Zero(b.size()), M - 1);
        CHECK_THROWS_WITH(project_field(b, s), Catch::Matchers::ContainsSubstring("under-resolves"));
    }
}

TEST_CASE("project_field round trip in 3D") {
    Basis b = Basis::build(3, 1);
    Eigen::VectorXd a = random_vector(b.size(), 5);
    Eigen::VectorXd back = project_field(b, sample(b, a, min_exact_grid(b)));
    CHECK((back - a).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Leray projection") {
    Basis b = Basis::build(2, 2);
    const auto& ks = b.wavevectors();

    SECTION("gradients are annihilated") {
        FourierField f = FourierField::zeros(2, ks);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g;
        for (std::size_t q = 0; q < ks.size(); ++q) {
            double gc = g(rng), gs = g(rng);
            // grad of gc sin(k.x) - gs cos(k.x)
            for (int c = 0; c < 2; ++c) {
                f.cos_coef[q][c] = gc * ks[q][c];
                f.sin_coef[q][c] = gs * ks[q][c];
            }
        }
        CHECK(leray_project(b, f).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SECTION("solenoidal fields are unchanged and projection is idempotent") {
        Eigen::VectorXd a = random_vector(b.size(), 9);
        Eigen::VectorXd pa = leray_project(b, to_fourier(b, a));
        CHECK((pa - a).cwiseAbs().maxCoeff() <= 1e-14);

        FourierField f = FourierField::zeros(2, ks);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> g;
        for (std::size_t q = 0; q < ks.size(); ++q)
            for (int c = 0; c < 2; ++c) {
                f.cos_coef[q][c] = g(rng);
                f.sin_coef[q][c] = g(rng);
            }
        Eigen::VectorXd p1 = leray_project(b, f);
        Eigen::VectorXd p2 = leray_project(b, to_fourier(b, p1));
        CHECK((p1 - p2).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SECTION("constant fields project to zero") {
        FourierField f = FourierField::zeros(2, ks);
        f.mean << 1.5, -2.0;
        CHECK(leray_project(b, f).isZero(0.0));
    }
    SECTION("mismatched wavevector set is rejected") {
        std::vector<WaveVector> fewer(ks.begin(), ks.end() - 1);
        CHECK_THROWS_AS(leray_project(b, FourierField::zeros(2, fewer)), std::invalid_argument);
    }
}

TEST_CASE("grid divergence of basis modes vanishes") {
    Basis b = Basis::build(3, 1);
    GridEvaluator ev(b, 6);
    Eigen::VectorXd a = random_vector(b.size(), 21);
    Eigen::MatrixXd g = ev.gradients(a);
    Eigen::VectorXd div = g.col(0) + g.col(4) + g.col(8);
    CHECK(div.cwiseAbs().maxCoeff() <= 1e-13);
}
