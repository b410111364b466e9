#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgns/config.hpp"
#include "sgns/ensemble.hpp"
#include "sgns/persist.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sgns_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
                                            std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Run {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run sgns_run(const TempDir& dir, const std::string& args, const std::string& env = "") {
    const char* exe = std::getenv("SGNS_CLI");
    REQUIRE(exe != nullptr);
    const fs::path o = dir.path / "stdout.txt", e = dir.path / "stderr.txt";
    std::string cmd = "env -u SGNS_SEED -u SGNS_OUT " + env + " '" + std::string(exe) + "' " + args + " >'" +
                      o.string() + "' 2>'" + e.string() + "'";
    int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

fs::path write_config(const TempDir& dir, const std::string& name, const std::string& text) {
    fs::path p = dir.path / name;
    std::ofstream(p) << text;
    return p;
}

const char* kSmall = R"({
  "basis": {"dim": 2, "cutoff": 2},
  "nu": 0.05,
  "noise": {"additive": [{"mode": 0, "terms": [{"k": [1, 1], "pol": 0, "phase": "cos", "amp": 0.1}]}]},
  "time": {"dt": 0.001, "T": 0.05},
  "initial": {"kind": "random", "amplitude": 0.5, "decay": 2.0},
  "ensemble": {"seed": 5, "save_stride": 1}
})";

}  // namespace

TEST_CASE("unknown subcommand is a usage error") {
    TempDir dir;
    Run r = sgns_run(dir, "bogus");
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("unknown subcommand 'bogus'"));
    CHECK_THAT(r.err, ContainsSubstring("simulate"));

    Run none = sgns_run(dir, "");
    CHECK(none.code == 2);
    Run badopt = sgns_run(dir, "simulate --no-such-option");
    CHECK(badopt.code == 2);
}

TEST_CASE("simulate with zero horizon stores only the initial state") {
    TempDir dir;
    std::string doc = kSmall;
    doc.replace(doc.find("\"T\": 0.05"), 9, "\"T\": 0.0");
    fs::path cfg = write_config(dir, "c.json", doc);
    fs::path out = dir.path / "run";
    Run r = sgns_run(dir, "simulate --config '" + cfg.string() + "' --out '" + out.string() + "'");
    REQUIRE(r.code == 0);

    sgns::RunConfig rc = sgns::load_config_file(cfg.string());
    rc.output_dir = out.string();
    sgns::StoredTrajectory st = sgns::load_trajectory((out / "trajectory.sgt").string(), sgns::config_hash(rc));
    CHECK(st.trajectory.size() == 1);
    CHECK(st.trajectory.times == std::vector<double>{0.0});
    sgns::Basis b = sgns::Basis::build(2, 2);
    CHECK(st.trajectory.states[0] == sgns::build_initial(rc, b)(0, sgns::member_seed(rc.seed, 0)));
    CHECK(fs::exists(out / "config.json"));
    CHECK(fs::exists(out / "report.ndjson"));
}

TEST_CASE("simulate is reproducible and honours the seed override") {
    TempDir dir;
    fs::path cfg = write_config(dir, "c.json", kSmall);
    auto run_to = [&](const std::string& sub, const std::string& extra, const std::string& env = "") {
        fs::path out = dir.path / sub;
        Run r = sgns_run(dir, "simulate --config '" + cfg.string() + "' --out '" + out.string() + "' " + extra, env);
        REQUIRE(r.code == 0);
        return sgns::read_file((out / "trajectory.sgt").string());
    };
    std::string a = run_to("a", ""), b = run_to("b", "");
    CHECK(a == b);
    std::string c = run_to("c", "--seed 6");
    CHECK(c != a);
    std::string d = run_to("d", "", "SGNS_SEED=6");
    CHECK(d == c);
    // the command line wins over the environment
    std::string e = run_to("e", "--seed 5", "SGNS_SEED=6");
    CHECK(e == a);
}

TEST_CASE("diagnose refuses a trajectory from another configuration") {
    TempDir dir;
    fs::path cfg = write_config(dir, "c.json", kSmall);
    fs::path out = dir.path / "run";
    REQUIRE(sgns_run(dir, "simulate --config '" + cfg.string() + "' --out '" + out.string() + "'").code == 0);

    Run same = sgns_run(dir, "diagnose '" + (out / "trajectory.sgt").string() + "' --config '" + cfg.string() +
                                 "' --out '" + (dir.path / "diag").string() + "'");
    CHECK(same.code == 0);
    CHECK_THAT(same.out, ContainsSubstring("energy_residual"));

    std::string other = kSmall;
    other.replace(other.find("\"nu\": 0.05"), 10, "\"nu\": 0.06");
    fs::path cfg2 = write_config(dir, "c2.json", other);
    Run r = sgns_run(dir, "diagnose '" + (out / "trajectory.sgt").string() + "' --config '" + cfg2.string() +
                              "' --out '" + (dir.path / "diag2").string() + "'");
    CHECK(r.code == 3);
    sgns::RunConfig c1 = sgns::load_config_file(cfg.string()), c2 = sgns::load_config_file(cfg2.string());
    CHECK_THAT(r.err, ContainsSubstring(sgns::hash_hex(sgns::config_hash(c1))));
    CHECK_THAT(r.err, ContainsSubstring(sgns::hash_hex(sgns::config_hash(c2))));
}

TEST_CASE("strict and lenient configuration parsing") {
    TempDir dir;
    std::string doc = kSmall;
    doc.insert(doc.find("\"nu\""), "\"colour\": \"blue\", ");
    fs::path cfg = write_config(dir, "c.json", doc);
    const std::string base = "simulate --config '" + cfg.string() + "' --out '" + (dir.path / "o").string() + "'";

    Run strict = sgns_run(dir, base);
    CHECK(strict.code == 3);
    CHECK_THAT(strict.err, ContainsSubstring("colour"));
    CHECK(sgns_run(dir, base + " --strict").code == 3);

    Run lenient = sgns_run(dir, base + " --lenient");
    CHECK(lenient.code == 0);
    CHECK_THAT(lenient.err, ContainsSubstring("warning"));

    CHECK(sgns_run(dir, base + " --strict --lenient").code == 2);
    CHECK(sgns_run(dir, "simulate --config '" + (dir.path / "missing.json").string() + "'").code == 3);
}

TEST_CASE("verify passes the invariant suite") {
    TempDir dir;
    Run r = sgns_run(dir, "verify --out '" + dir.path.string() + "'");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir.path / "verify.ndjson"));
    CHECK_THAT(r.out, ContainsSubstring("\"pass\":true"));
    CHECK_THAT(r.out, !ContainsSubstring("\"pass\":false"));
}
