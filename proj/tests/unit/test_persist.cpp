#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "sgns/config.hpp"
#include "sgns/persist.hpp"
#include "sgns/verification.hpp"

using namespace sgns;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sgns_persist_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                                            "_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

Trajectory sample_trajectory() {
    GalerkinSystem sys = reference_system(2, 0.05, 0.16, 1.0);
    Eigen::VectorXd a0 = smooth_random_field(sys.basis, 2, 0.5, 2.0);
    IntegrateOptions opt;
    opt.save_stride = 10;
    return integrate(sys, a0, make_path(6, 0.05, 1e-3, 0, sys.K()), Scheme::Heun, opt);
}

}  // namespace

TEST_CASE("encode and decode are inverse") {
    Trajectory tr = sample_trajectory();
    std::string bytes = encode_trajectory(tr, 2, 0x1234);
    CHECK(bytes.substr(0, 8) == "SGNSTRAJ");
    StoredTrajectory st = decode_trajectory(bytes);
    CHECK(st.version == kTrajectoryFormatVersion);
    CHECK(st.config_hash == 0x1234);
    CHECK(st.dim == 2);
    const Trajectory& back = st.trajectory;
    CHECK(back.path == tr.path);
    CHECK(back.scheme == tr.scheme);
    CHECK(back.steps == tr.steps);
    CHECK(back.times == tr.times);
    CHECK(back.states == tr.states);
    CHECK(back.record.stochastic == tr.record.stochastic);
    CHECK(back.grad_integral == tr.grad_integral);
    CHECK(back.sup_kinetic == tr.sup_kinetic);
    CHECK(encode_trajectory(back, 2, 0x1234) == bytes);
}

TEST_CASE("file round trip is bitwise") {
    TempDir dir;
    Trajectory tr = sample_trajectory();
    std::string p = (dir.path / "t.sgt").string();
    save_trajectory(p, tr, 2, 77);
    CHECK(read_file(p) == encode_trajectory(tr, 2, 77));
    StoredTrajectory st = load_trajectory(p, 77);
    for (std::size_t i = 0; i < tr.size(); ++i)
        CHECK(std::memcmp(st.trajectory.states[i].data(), tr.states[i].data(), sizeof(double) * tr.states[i].size()) ==
              0);
}

TEST_CASE("distinct load errors") {
    Trajectory tr = sample_trajectory();
    const std::string good = encode_trajectory(tr, 2, 99);

    SECTION("truncated") {
        for (std::size_t cut : {std::size_t{4}, std::size_t{30}, good.size() - 8})
            CHECK_THROWS_AS(decode_trajectory(good.substr(0, cut)), TruncatedFileError);
    }
    SECTION("bad magic") {
        std::string b = good;
        b[0] = 'X';
        CHECK_THROWS_AS(decode_trajectory(b), BadMagicError);
    }
    SECTION("version bump names both versions") {
        std::string b = good;
        std::uint32_t v = kTrajectoryFormatVersion + 1;
        std::memcpy(b.data() + 8, &v, 4);
        try {
            decode_trajectory(b);
            FAIL("expected a version error");
        } catch (const VersionMismatchError& e) {
            CHECK(e.found == kTrajectoryFormatVersion + 1);
            CHECK(e.expected == kTrajectoryFormatVersion);
            CHECK_THAT(std::string(e.what()), ContainsSubstring("2"));
            CHECK_THAT(std::string(e.what()), ContainsSubstring("1"));
        }
    }
    SECTION("hash mismatch names both hashes") {
        TempDir dir;
        std::string p = (dir.path / "t.sgt").string();
        write_file(p, good);
        try {
            load_trajectory(p, 100);
            FAIL("expected a hash error");
        } catch (const HashMismatchError& e) {
            CHECK(e.file_hash == 99);
            CHECK(e.expected_hash == 100);
            CHECK_THAT(std::string(e.what()), ContainsSubstring(hash_hex(99)));
            CHECK_THAT(std::string(e.what()), ContainsSubstring(hash_hex(100)));
        }
        CHECK_NOTHROW(load_trajectory(p, 0));
    }
    SECTION("trailing bytes") { CHECK_THROWS_AS(decode_trajectory(good + "x"), PersistError); }
    SECTION("missing file") { CHECK_THROWS_AS(load_trajectory("/nonexistent/file.sgt"), PersistError); }
}

TEST_CASE("NDJSON summary has one record per saved time") {
    TempDir dir;
    Trajectory tr = sample_trajectory();
    std::string p = (dir.path / "t.ndjson").string();
    write_trajectory_summary(p, tr, 5);
    std::istringstream in(read_file(p));
    std::size_t n = 0;
    for (std::string line; std::getline(in, line); ++n) {
        auto j = nlohmann::json::parse(line);
        CHECK(j["t"].get<double>() == tr.times[n]);
        CHECK(j["energy"].get<double>() == tr.energy[n]);
        CHECK(j["grad_energy"].get<double>() == tr.grad_energy[n]);
        CHECK(j["config_hash"] == hash_hex(5));
    }
    CHECK(n == tr.size());
}

TEST_CASE("ensemble directory with manifest") {
    TempDir dir;
    GalerkinSystem sys = reference_system(2, 0.05, 0.16, 1.0);
    EnsembleConfig cfg;
    cfg.T = 0.02;
    cfg.base_seed = 3;
    cfg.config_hash = 0xfeed;
    Ensemble ens = run_ensemble(sys, gaussian_initial(sys.basis, 0.5, 2.0), 3, cfg);
    save_ensemble(dir.path.string(), ens, 2);
    std::istringstream in(read_file((dir.path / "manifest.ndjson").string()));
    std::string line;
    std::getline(in, line);
    auto head = nlohmann::json::parse(line);
    CHECK(head["members"] == 3);
    CHECK(head["config_hash"] == hash_hex(0xfeed));
    for (std::size_t m = 0; m < 3; ++m) {
        REQUIRE(std::getline(in, line));
        auto j = nlohmann::json::parse(line);
        CHECK(j["seed"].get<std::uint64_t>() == ens.seeds[m]);
        StoredTrajectory st = load_trajectory((dir.path / j["file"].get<std::string>()).string(), 0xfeed);
        CHECK(st.trajectory.states == ens.members[m].states);
    }
}
