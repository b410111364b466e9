#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sgns/brownian.hpp"
#include "sgns/rng.hpp"

using namespace sgns;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter samples are pure functions of their address") {
    CHECK(counter_normal(5, 1, 2, 3, 4) == counter_normal(5, 1, 2, 3, 4));
    CHECK(counter_normal(5, 1, 2, 3, 4) != counter_normal(6, 1, 2, 3, 4));
    CHECK(counter_normal(5, 1, 2, 3, 4) != counter_normal(5, 1, 2, 3, 5));
    for (std::uint32_t i = 0; i < 1000; ++i) {
        double u = counter_uniform(1, i, 0, 0, 0);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("standard normal moments") {
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = counter_normal(99, static_cast<std::uint32_t>(i), 7, 0, 0);
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("make_path validates its arguments") {
    PathSpec p = make_path(1, 1.0, 1e-2, 2, 3);
    CHECK(p.n_steps == 400);
    CHECK(p.dt() == Catch::Approx(2.5e-3));
    CHECK(p.horizon() == Catch::Approx(1.0));
    CHECK(make_path(1, 0.0, 1e-2, 0, 3).n_steps == 0);
    CHECK_THROWS_AS(make_path(1, 1.0, 0.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_path(1, 1.0, 1e-2, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_path(1, -1.0, 1e-2, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_path(1, 0.0105, 1e-2, 0, 1), std::invalid_argument);
}

TEST_CASE("paths are reproducible and seed-separated") {
    PathSpec p = make_path(42, 0.1, 1e-2, 1, 2);
    Eigen::MatrixXd a = BrownianPath(p).materialize();
    Eigen::MatrixXd b = BrownianPath(p).materialize();
    CHECK(a == b);
    PathSpec q = p;
    q.seed = 43;
    CHECK((a - BrownianPath(q).materialize()).cwiseAbs().maxCoeff() > 0.0);
    // random access agrees with sequential access
    BrownianPath bp(p);
    for (std::size_t n : {7u, 0u, 19u, 3u})
        for (std::size_t l = 0; l < 2; ++l) CHECK(bp.increment(n)[l] == a(n, l));
    CHECK_THROWS_AS(bp.increment(p.n_steps), std::out_of_range);
}

TEST_CASE("refined paths sum pairwise to the coarse path") {
    PathSpec coarse = make_path(7, 0.5, 1e-2, 0, 3);
    Eigen::MatrixXd c = BrownianPath(coarse).materialize();
    for (int extra : {1, 2, 4}) {
        PathSpec fine = coarse.refined(extra);
        CHECK(fine.n_steps == coarse.n_steps << extra);
        Eigen::MatrixXd f = BrownianPath(fine).materialize();
        const std::size_t r = std::size_t{1} << extra;
        double worst = 0.0;
        for (std::size_t n = 0; n < coarse.n_steps; ++n) {
            Eigen::RowVectorXd s = f.middleRows(n * r, r).colwise().sum();
            worst = std::max(worst, (s - c.row(n)).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-15);
    }
}

TEST_CASE("increments have variance dt at every level") {
    for (int level : {0, 3}) {
        PathSpec p = make_path(3, 20.0, 1e-2, level, 4);
        Eigen::MatrixXd w = BrownianPath(p).materialize();
        const double n = static_cast<double>(w.size());
        double var = w.squaredNorm() / n;
        CHECK(std::abs(var / p.dt() - 1.0) < 4.0 * std::sqrt(2.0 / n));
        CHECK(std::abs(w.mean()) / std::sqrt(p.dt()) < 4.0 / std::sqrt(n));
        // distinct modes are uncorrelated
        double c01 = w.col(0).dot(w.col(1)) / (static_cast<double>(w.rows()) * p.dt());
        CHECK(std::abs(c01) < 4.0 / std::sqrt(static_cast<double>(w.rows())));
    }
}

TEST_CASE("splitmix64 reference values") {
    // first outputs of the reference generator seeded with 0
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
    CHECK(splitmix64(1) != splitmix64(2));
}
