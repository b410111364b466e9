#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "sgns/config.hpp"

using namespace sgns;
using Catch::Matchers::ContainsSubstring;

namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

const char* kFull = R"({
  "basis": {"dim": 2, "cutoff": 3},
  "nu": 0.02,
  "noise": {
    "brownian_modes": 3,
    "additive": [{"mode": 0, "terms": [{"k": [1, 1], "pol": 0, "phase": "cos", "amp": 0.16}]}],
    "transport": [{"mode": 2, "terms": [{"k": [1, 0], "pol": 0, "phase": "cos", "amp": 1.0}]}]
  },
  "scheme": "heun",
  "time": {"dt": 0.001, "level": 1, "T": 0.5},
  "initial": {"kind": "random", "amplitude": 0.5, "decay": 2.0},
  "ensemble": {"members": 8, "seed": 11, "save_stride": 1, "probe_times": [0.25, 0.5]},
  "diagnostics": ["energy_residual", "moments"],
  "output_dir": "somewhere"
})";

}  // namespace

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hash_hex(0xabcULL) == "0000000000000abc");
}

TEST_CASE("minimal config takes defaults") {
    ParseResult r = parse_config(R"({"basis": {"dim": 2, "cutoff": 2}, "nu": 0.1})");
    REQUIRE(r.ok());
    const RunConfig& c = r.config;
    CHECK(c.dim == 2);
    CHECK(c.cutoff == 2);
    CHECK(c.nu == 0.1);
    CHECK(c.brownian_modes == 0);
    CHECK(c.scheme == Scheme::Heun);
    CHECK(c.initial.kind == "zero");
    CHECK(c.members == 1);
    // defaults are written out explicitly in the canonical form
    std::string emitted = emit_config(c);
    for (const char* key : {"\"scheme\"", "\"time\"", "\"ensemble\"", "\"sweep\"", "\"output_dir\""})
        CHECK_THAT(emitted, ContainsSubstring(key));
}

TEST_CASE("canonical round trip keeps the hash") {
    RunConfig c = load_config(kFull);
    RunConfig back = load_config(emit_config(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(emit_config(back) == emit_config(c));
    CHECK(back.transport.size() == 1);
    CHECK(back.probe_times == std::vector<double>{0.25, 0.5});

    // key order and whitespace do not matter
    RunConfig shuffled = load_config(R"({"output_dir": "elsewhere", "nu": 0.02, "scheme": "heun",
        "diagnostics": ["energy_residual", "moments"],
        "ensemble": {"seed": 11, "members": 8, "probe_times": [0.5, 0.25], "save_stride": 1},
        "initial": {"decay": 2.0, "amplitude": 0.5, "kind": "random"},
        "time": {"T": 0.5, "level": 1, "dt": 0.001},
        "noise": {"transport": [{"terms": [{"amp": 1.0, "phase": "cos", "pol": 0, "k": [1, 0]}], "mode": 2}],
                  "additive": [{"mode": 0, "terms": [{"k": [1, 1], "pol": 0, "phase": "cos", "amp": 0.16}]}],
                  "brownian_modes": 3},
        "basis": {"cutoff": 3, "dim": 2}})");
    CHECK(config_hash(shuffled) == config_hash(c));
}

TEST_CASE("output directory is not part of the hash") {
    RunConfig c = load_config(kFull);
    RunConfig d = c;
    d.output_dir = "another/place";
    CHECK(config_hash(c) == config_hash(d));
    d.seed += 1;
    CHECK(config_hash(c) != config_hash(d));
    d = c;
    d.nu = 0.03;
    CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("unknown keys: strict rejects, lenient warns") {
    const char* doc = R"({"basis": {"dim": 2, "cutoff": 2, "colour": 1}, "nu": 0.1, "extra": true})";
    ParseResult strict = parse_config(doc, true);
    CHECK_FALSE(strict.ok());
    CHECK(any_contains(strict.errors, "colour"));
    CHECK(any_contains(strict.errors, "extra"));

    ParseResult lenient = parse_config(doc, false);
    CHECK(lenient.ok());
    CHECK(lenient.warnings.size() == 2);
}

TEST_CASE("overlapping noise supports name the mode") {
    ParseResult r = parse_config(R"({
      "basis": {"dim": 2, "cutoff": 2},
      "noise": {"brownian_modes": 5,
        "additive": [{"mode": 3, "terms": [{"k": [1, 0], "pol": 0, "phase": "cos", "amp": 0.1}]}],
        "transport": [{"mode": 3, "terms": [{"k": [0, 1], "pol": 0, "phase": "sin", "amp": 1.0}]}]}
    })");
    CHECK_FALSE(r.ok());
    CHECK(any_contains(r.errors, "mode 3"));
}

TEST_CASE("every validation error is reported") {
    ParseResult r = parse_config(R"({
      "basis": {"dim": 4, "cutoff": 0},
      "nu": -1,
      "scheme": "rk4",
      "time": {"dt": 0.001, "T": 0.0105},
      "initial": {"kind": "mystery"},
      "ensemble": {"members": 0},
      "diagnostics": ["telepathy"],
      "sweep": {"nu": [0.01, 0.1], "kind": "zigzag"}
    })");
    CHECK_FALSE(r.ok());
    for (const char* what : {"basis.dim", "basis.cutoff", "nu", "scheme", "time.T", "initial.kind",
                             "ensemble.members", "telepathy", "sweep.nu", "sweep.kind"})
        CHECK(any_contains(r.errors, what));
    CHECK(r.errors.size() >= 10);

    try {
        load_config(R"({"basis": {"dim": 5}, "nu": -2})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.errors().size() == 2);
        CHECK_THAT(std::string(e.what()), ContainsSubstring("basis.dim"));
    }
}

TEST_CASE("type errors and malformed documents") {
    CHECK_FALSE(parse_config("{not json").ok());
    CHECK_FALSE(parse_config("[1, 2]").ok());
    ParseResult r = parse_config(R"({"basis": {"dim": "two"}, "nu": "fast"})");
    CHECK(any_contains(r.errors, "basis.dim"));
    CHECK(any_contains(r.errors, "nu"));
}

TEST_CASE("noise term validation") {
    ParseResult r = parse_config(R"({
      "basis": {"dim": 2, "cutoff": 2},
      "noise": {"additive": [
        {"mode": 0, "terms": [{"k": [-1, 0], "pol": 0, "phase": "cos", "amp": 0.1}]},
        {"mode": 1, "terms": [{"k": [3, 0], "pol": 0, "phase": "cos", "amp": 0.1}]},
        {"mode": 2, "terms": [{"k": [1, 0], "pol": 1, "phase": "tan", "amp": 0.1}]},
        {"mode": 3, "terms": [{"k": [0, 0], "pol": 0, "phase": "cos"}]}
      ]}
    })");
    CHECK(any_contains(r.errors, "canonical"));
    CHECK(any_contains(r.errors, "exceeds cutoff"));
    CHECK(any_contains(r.errors, "polarization"));
    CHECK(any_contains(r.errors, "phase"));
    CHECK(any_contains(r.errors, "zero wavevector"));
    CHECK(any_contains(r.errors, "amp"));
}

TEST_CASE("Brownian mode count is inferred or checked") {
    RunConfig c = load_config(R"({"noise": {"additive": [{"mode": 4, "terms": []}]}})");
    CHECK(c.brownian_modes == 5);
    ParseResult r = parse_config(R"({"noise": {"brownian_modes": 2, "additive": [{"mode": 4, "terms": []}]}})");
    CHECK(any_contains(r.errors, "out of range"));
}

TEST_CASE("transport cutoff may exceed the basis cutoff") {
    const char* doc = R"({"basis": {"dim": 2, "cutoff": 2}, "noise": {"transport_cutoff": 3,
        "transport": [{"mode": 0, "terms": [{"k": [3, 0], "pol": 0, "phase": "cos", "amp": 1.0}]}]}})";
    RunConfig c = load_config(doc);
    GalerkinSystem sys = build_system(c);
    CHECK(sys.has_transport());
    CHECK(Eigen::MatrixXd(sys.noise.transport.zeta[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("built objects follow the config") {
    RunConfig c = load_config(kFull);
    GalerkinSystem sys = build_system(c);
    CHECK(sys.N() == 48);
    CHECK(sys.K() == 3);
    CHECK(sys.nu == 0.02);
    CHECK(sys.eta_hs == Catch::Approx(0.16 * 0.16));
    PathSpec p = build_path(c, 5);
    CHECK(p.n_steps == 1000);
    EnsembleConfig e = build_ensemble_config(c, 2);
    CHECK(e.config_hash == config_hash(c));
    CHECK(e.base_seed == 11);
    CHECK(e.level == 1);
    CHECK_FALSE(e.keep_integrals);

    RunConfig coef = load_config(R"({"basis": {"dim": 2, "cutoff": 1},
        "initial": {"kind": "coefficients", "coefficients": [1, 0, 0, 0, 0, 0, 0, 2]}})");
    Basis b = Basis::build(2, 1);
    Eigen::VectorXd a = build_initial(coef, b)(0, 0);
    CHECK(a[0] == 1.0);
    CHECK(a[7] == 2.0);
    ParseResult bad = parse_config(R"({"basis": {"dim": 2, "cutoff": 1},
        "initial": {"kind": "coefficients", "coefficients": [1, 2]}})");
    CHECK(any_contains(bad.errors, "expected 8 coefficients"));
}

TEST_CASE("missing config file") {
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
}
