#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "quadrature_oracle.hpp"
#include "sgns/experiments.hpp"
#include "sgns/verification.hpp"

using namespace sgns;

namespace {

SweepPlan small_plan(std::vector<double> nu) {
    SweepPlan plan;
    plan.nu = std::move(nu);
    plan.members = 8;
    plan.ensemble.T = 0.2;
    plan.ensemble.root_dt = 1e-3;
    plan.ensemble.scheme = Scheme::Heun;
    plan.ensemble.base_seed = 3;
    plan.gap_battery = false;
    return plan;
}

Eigen::VectorXd unit_mode(const Basis& b, const WaveVector& k, Phase ph) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(b.size());
    e[*b.find(k, 0, ph)] = 1.0;
    return e;
}

}  // namespace

TEST_CASE("log-log slope") {
    std::vector<double> x{1e-3, 1e-2, 1e-1, 1.0}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 0.5));
    CHECK(loglog_slope(x, y) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("viscosity sweep axis validation") {
    GalerkinSystem sys = reference_system(2, 0.1, 0.05, 1.0);
    Eigen::VectorXd phi = unit_mode(sys.basis, {1, 1, 0}, Phase::Cos);
    auto init = fixed_initial(smooth_random_field(sys.basis, 1, 0.5, 2.0));
    CHECK_THROWS_AS(viscosity_sweep(small_plan({1e-2, 1e-1}), sys, init, phi), std::invalid_argument);
    CHECK_THROWS_AS(viscosity_sweep(small_plan({1e-1, 1e-1}), sys, init, phi), std::invalid_argument);
    CHECK_THROWS_AS(viscosity_sweep(small_plan({1e-1, 0.0}), sys, init, phi), std::invalid_argument);
    CHECK_THROWS_AS(viscosity_sweep(small_plan({}), sys, init, phi), std::invalid_argument);
    CHECK_THROWS_AS(viscosity_sweep(small_plan({1e-1}), sys, init, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("a single viscosity is a plain ensemble run") {
    GalerkinSystem sys = reference_system(2, 0.1, 0.05, 1.0);
    Eigen::VectorXd phi = unit_mode(sys.basis, {1, 1, 0}, Phase::Cos);
    Eigen::VectorXd a0 = smooth_random_field(sys.basis, 1, 0.5, 2.0);
    SweepPlan plan = small_plan({0.05});
    SweepReport rep = viscosity_sweep(plan, sys, fixed_initial(a0), phi);
    REQUIRE(rep.points.size() == 1);

    Ensemble ens = run_ensemble(with_viscosity(sys, 0.05), fixed_initial(a0), plan.members, plan.ensemble);
    MomentReport mr = moment_report(ens, plan.moment_p);
    CHECK(rep.points[0].moments.sup_moment.mean == mr.sup_moment.mean);
    CHECK(rep.points[0].viscous_functional.mean == mr.viscous_functional.mean);
    CHECK(rep.moment_ratio == 1.0);
}

TEST_CASE("sweep report contents") {
    GalerkinSystem sys = reference_system(2, 0.1, 0.05, 1.0);
    Eigen::VectorXd phi = unit_mode(sys.basis, {1, 1, 0}, Phase::Cos);
    SweepPlan plan = small_plan({1e-1, 1e-2, 1e-3});
    plan.gap_battery = true;
    plan.point_hash = [](double nu) { return static_cast<std::uint64_t>(1e6 * nu) + 7; };
    SweepReport rep = viscosity_sweep(plan, sys, fixed_initial(smooth_random_field(sys.basis, 1, 0.5, 2.0)), phi);
    REQUIRE(rep.points.size() == 3);
    std::set<std::uint64_t> hashes;
    for (const auto& pt : rep.points) {
        CHECK(pt.config_hash == plan.point_hash(pt.nu));
        hashes.insert(pt.config_hash);
        CHECK(pt.blowups == 0);
        CHECK(pt.weighted_term > 0.0);
    }
    CHECK(hashes.size() == 3);
    CHECK(rep.gaps.size() == 10);
    CHECK(rep.gap_names.size() == 10);
    // shared paths: neighbouring viscosities give close fields
    CHECK(rep.points[1].cauchy_next < rep.points[0].cauchy_next);
    CHECK(rep.points.back().cauchy_next == 0.0);
    CHECK(rep.viscous_bounded);
}

TEST_CASE("order study validation") {
    GalerkinSystem sys = reference_system(2, 0.05, 0.3, 0.0);
    auto init = fixed_initial(Eigen::VectorXd::Zero(sys.N()));
    CHECK_THROWS_AS(order_study(sys, Scheme::EulerMaruyama, init, {0, 1}, 1e-2, 0.1, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(order_study(sys, Scheme::EulerMaruyama, init, {0, 2, 3}, 1e-2, 0.1, 2, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(order_study(sys, Scheme::EulerMaruyama, init, {0, 1, 2}, 1e-2, 0.1, 2, 1, 1, 0),
                    std::invalid_argument);
}

TEST_CASE("deterministic single mode has order one") {
    Basis b = Basis::build(2, 2);
    GalerkinSystem sys = make_system(b, no_noise(b.size()), 0.5);
    Eigen::VectorXd a0 = unit_mode(b, {1, 1, 0}, Phase::Sin);
    OrderReport r = order_study(sys, Scheme::EulerMaruyama, fixed_initial(a0), {0, 1, 2}, 1e-2, 1.0, 1, 0, 1, 4);
    CHECK(r.slope == Catch::Approx(1.0).margin(0.1));
    CHECK(r.dt == std::vector<double>{1e-2, 5e-3, 2.5e-3});
    CHECK(r.reference_dt == Catch::Approx(1e-2 / 64));
}

TEST_CASE("additive noise is order one for EM") {
    GalerkinSystem sys = reference_system(2, 0.05, 0.3, 0.0);
    OrderReport r = order_study(sys, Scheme::EulerMaruyama, gaussian_initial(sys.basis, 0.5, 2.0), {0, 1, 2}, 1e-2,
                                0.5, 32, 17, 0, 4);
    CHECK(r.slope == Catch::Approx(1.0).margin(0.15));
}

TEST_CASE("transport noise is order one half for EM") {
    GalerkinSystem sys = reference_system(2, 0.05, 0.0, 2.0);
    OrderReport r = order_study(sys, Scheme::EulerMaruyama, gaussian_initial(sys.basis, 0.5, 2.0), {0, 1, 2}, 1e-2,
                                0.5, 64, 17, 0, 4);
    CHECK(r.slope == Catch::Approx(0.5).margin(0.15));
}

TEST_CASE("kernel benchmark") {
    SECTION("empty tensor") {
        Basis b = Basis::build(2, 1);
        GalerkinSystem sys = make_system(b, ConvectionTensor(b.size(), {}), no_noise(b.size()), 0.0);
        CHECK(sys.b.contract(Eigen::VectorXd::Ones(b.size())).isZero(0.0));
        KernelBenchmarkRow row = kernel_benchmark(sys, 100);
        CHECK(row.nnz == 0);
        CHECK(row.reps == 100);
        CHECK(row.seconds >= 0.0);
    }
    SECTION("rows per cutoff") {
        auto rows = kernel_benchmark(2, {1, 2, 3}, 50);
        REQUIRE(rows.size() == 3);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].N > rows[i - 1].N);
            CHECK(rows[i].nnz > rows[i - 1].nnz);
            CHECK(rows[i].bytes_per_contraction > rows[i - 1].bytes_per_contraction);
        }
    }
    SECTION("sparse kernel equals dense kernel") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> g;
        for (int c : {1, 2, 3}) {
            Basis b = Basis::build(2, c);
            ConvectionTensor t = convection_tensor(b);
            auto dense = oracle::dense_convection(b, 3 * c + 3);
            Eigen::VectorXd a(b.size());
            for (auto& x : a) x = g(rng);
            CHECK((t.contract(a) - oracle::dense_contract(dense, b.size(), a)).cwiseAbs().maxCoeff() <= 1e-13);
        }
    }
}
