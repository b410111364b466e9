#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgns/config.hpp"
#include "sgns/diagnostics.hpp"
#include "sgns/ensemble.hpp"
#include "sgns/experiments.hpp"
#include "sgns/persist.hpp"
#include "sgns/verification.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

// Shared tolerance for per-run energy residual and gap records.
constexpr double kReportTolerance = 5e-3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = 0;
    bool lenient = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "run configuration (JSON)");
    sub->add_option("--seed", c.seed, "base seed (overrides SGNS_SEED and the config)");
    sub->add_option("--out", c.out, "output directory (overrides SGNS_OUT and the config)");
    sub->add_option("--threads", c.threads, "worker threads, 0 = all cores")->default_val(0);
    auto* strict = sub->add_flag("--strict", "reject unknown configuration keys (default)");
    auto* lenient = sub->add_flag("--lenient", c.lenient, "warn about unknown configuration keys instead");
    strict->excludes(lenient);
}

sgns::RunConfig resolve(const Common& c) {
    sgns::RunConfig cfg;
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in) throw sgns::ConfigError({"cannot open configuration file '" + c.config + "'"});
        std::stringstream ss;
        ss << in.rdbuf();
        sgns::ParseResult r = sgns::parse_config(ss.str(), !c.lenient);
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
        if (!r.ok()) throw sgns::ConfigError(r.errors);
        cfg = r.config;
    }
    if (const char* env = std::getenv("SGNS_SEED")) cfg.seed = std::stoull(env);
    if (const char* env = std::getenv("SGNS_OUT")) cfg.output_dir = env;
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

void write_text(const fs::path& p, const std::string& text) { sgns::write_file(p.string(), text); }

json record(const std::string& name, double s, double t, double value, double tol, std::uint64_t hash) {
    return json{{"name", name},          {"interval", {s, t}},        {"value", value},
                {"tolerance", tol},      {"pass", std::abs(value) <= tol}, {"config_hash", sgns::hash_hex(hash)}};
}

// Writes records to <out>/<file> and stdout; returns the number of failures.
int emit(const fs::path& out, const std::string& file, const std::vector<json>& records) {
    std::string text;
    int failed = 0;
    for (const auto& r : records) {
        text += r.dump() + "\n";
        if (r.contains("pass") && !r["pass"].get<bool>()) ++failed;
    }
    write_text(out / file, text);
    std::cout << text;
    return failed;
}

std::vector<json> trajectory_records(const sgns::Trajectory& tr, const sgns::GalerkinSystem& sys,
                                     const sgns::RunConfig& cfg, std::uint64_t hash) {
    std::vector<json> recs;
    const double T = tr.times.back();
    recs.push_back(record("energy_residual", 0.0, T, sgns::energy_residual_between(tr, sys, 0, tr.size() - 1),
                          kReportTolerance, hash));
    auto wants = [&](const char* d) {
        return std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), d) != cfg.diagnostics.end();
    };
    if (wants("gap_battery")) {
        if (!tr.every_step()) {
            recs.push_back(json{{"name", "gap_battery"},
                                {"skipped", "trajectory not saved at every step (set ensemble.save_stride to 1)"},
                                {"config_hash", sgns::hash_hex(hash)}});
        } else {
            auto zero = sgns::energy_variational_gap(tr, sgns::zero_test_process(sys.N()), sys, 0.0, T);
            recs.push_back(record("gap/zero", 0.0, T, zero, kReportTolerance, hash));
            for (const auto& phi : sgns::test_process_library(sys, T, cfg.seed)) {
                double gv = sgns::energy_variational_gap(tr, phi, sys, 0.0, T);
                json r = record("gap/" + phi.name, 0.0, T, gv, kReportTolerance, hash);
                r["pass"] = gv <= kReportTolerance;  // one-sided inequality
                recs.push_back(r);
            }
        }
    }
    if (tr.blew_up)
        recs.push_back(json{{"name", "blowup"}, {"time", tr.blowup_time}, {"pass", false},
                            {"config_hash", sgns::hash_hex(hash)}});
    return recs;
}

std::vector<json> ensemble_records(const sgns::Ensemble& ens, const sgns::GalerkinSystem& sys,
                                   const sgns::RunConfig& cfg, std::uint64_t hash, const fs::path& out) {
    std::vector<json> recs;
    auto wants = [&](const char* d) {
        return std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), d) != cfg.diagnostics.end();
    };
    const double T = ens.members.front().times.back();
    std::vector<double> res(ens.size());
    for (std::size_t m = 0; m < ens.size(); ++m)
        res[m] = sgns::energy_residual_between(ens.members[m], sys, 0, ens.members[m].size() - 1);
    sgns::Estimate e = sgns::mean_se(res);
    json r = record("energy_residual_mean", 0.0, T, e.mean, std::max(kReportTolerance, 3.0 * e.se), hash);
    r["stderr"] = e.se;
    recs.push_back(r);

    if (wants("moments")) {
        sgns::MomentReport mr = sgns::moment_report(ens, cfg.sweep.moment_p);
        recs.push_back(json{{"name", "moments"},
                            {"p", mr.p},
                            {"sup_moment", mr.sup_moment.mean},
                            {"sup_moment_stderr", mr.sup_moment.se},
                            {"viscous_moment", mr.viscous_moment.mean},
                            {"viscous_functional", mr.viscous_functional.mean},
                            {"config_hash", sgns::hash_hex(hash)}});
    }
    if (wants("reynolds_defect") && ens.size() >= 2) {
        const int M = 2 * sys.basis.cutoff() + 2;
        sgns::DefectField d = sgns::reynolds_defect(ens, sys.basis, T, M);
        json dr = record("reynolds_defect_identity", T, T,
                         d.trace_integral - (d.mean_energy - d.mean_field_energy), 1e-12, hash);
        dr["min_eigenvalue"] = d.min_eigenvalue;
        dr["pass"] = dr["pass"].get<bool>() && d.min_eigenvalue >= -1e-10;
        recs.push_back(dr);
        sgns::GridEvaluator grid(sys.basis, M);
        std::string csv;
        const int dim = sys.basis.dim();
        for (int c = 0; c < dim; ++c) csv += std::string(c ? "," : "") + "x" + std::to_string(c);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) csv += ",R" + std::to_string(a) + std::to_string(b);
        csv += "\n";
        for (std::size_t gi = 0; gi < d.R.size(); ++gi) {
            Eigen::VectorXd x = grid.point(gi);
            char buf[64];
            for (int c = 0; c < dim; ++c) {
                std::snprintf(buf, sizeof buf, "%s%.17g", c ? "," : "", x[c]);
                csv += buf;
            }
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) {
                    std::snprintf(buf, sizeof buf, ",%.17g", d.R[gi](a, b));
                    csv += buf;
                }
            csv += "\n";
        }
        write_text(out / "defect.csv", csv);
    }
    if (wants("weak_residual") && !ens.members.front().int_state.empty()) {
        const sgns::Basis& b = sys.basis;
        sgns::FourierField phi = sgns::FourierField::zeros(b.dim(), b.wavevectors());
        // a single shear mode along the first wavevector
        const sgns::Mode& m0 = b.mode(0);
        for (int c = 0; c < b.dim(); ++c) phi.cos_coef[0][c] = m0.p[c];
        sgns::Estimate w = sgns::dissipative_weak_residual(ens, sys, phi, T);
        json wr = record("weak_residual", 0.0, T, w.mean, std::max(3.0 * w.se, 1e-12), hash);
        wr["stderr"] = w.se;
        recs.push_back(wr);
    }
    return recs;
}

int cmd_simulate(const Common& c) {
    sgns::RunConfig cfg = resolve(c);
    const std::uint64_t hash = sgns::config_hash(cfg);
    sgns::GalerkinSystem sys = sgns::build_system(cfg);
    const std::uint64_t seed = sgns::member_seed(cfg.seed, 0);
    Eigen::VectorXd a0 = sgns::build_initial(cfg, sys.basis)(0, seed);
    sgns::IntegrateOptions opt;
    opt.save_stride = cfg.save_stride;
    sgns::Trajectory tr = sgns::integrate(sys, a0, sgns::build_path(cfg, seed), cfg.scheme, opt);

    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    write_text(out / "config.json", sgns::emit_config(cfg));
    sgns::save_trajectory((out / "trajectory.sgt").string(), tr, cfg.dim, hash);
    sgns::write_trajectory_summary((out / "trajectory.ndjson").string(), tr, hash);
    return emit(out, "report.ndjson", trajectory_records(tr, sys, cfg, hash)) == 0 ? 0 : kExitFailedChecks;
}

int cmd_ensemble(const Common& c) {
    sgns::RunConfig cfg = resolve(c);
    const std::uint64_t hash = sgns::config_hash(cfg);
    sgns::GalerkinSystem sys = sgns::build_system(cfg);
    sgns::Ensemble ens =
        sgns::run_ensemble(sys, sgns::build_initial(cfg, sys.basis), cfg.members, sgns::build_ensemble_config(cfg, c.threads));
    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    write_text(out / "config.json", sgns::emit_config(cfg));
    sgns::save_ensemble((out / "members").string(), ens, cfg.dim);
    return emit(out, "report.ndjson", ensemble_records(ens, sys, cfg, hash, out)) == 0 ? 0 : kExitFailedChecks;
}

int cmd_diagnose(const Common& c, const std::string& input) {
    sgns::RunConfig cfg = resolve(c);
    const std::uint64_t hash = sgns::config_hash(cfg);
    sgns::GalerkinSystem sys = sgns::build_system(cfg);
    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    try {
        if (fs::is_directory(input)) {
            std::ifstream man((fs::path(input) / "manifest.ndjson").string());
            if (!man) throw sgns::PersistError("no manifest.ndjson in '" + input + "'");
            sgns::Ensemble ens;
            ens.config_hash = hash;
            std::string line;
            bool header = true;
            while (std::getline(man, line)) {
                if (line.empty()) continue;
                json j = json::parse(line);
                if (header) {
                    header = false;
                    continue;
                }
                auto st = sgns::load_trajectory((fs::path(input) / j["file"].get<std::string>()).string(), hash);
                ens.seeds.push_back(j["seed"].get<std::uint64_t>());
                ens.members.push_back(std::move(st.trajectory));
            }
            if (ens.members.empty()) throw sgns::PersistError("manifest lists no members");
            return emit(out, "diagnose.ndjson", ensemble_records(ens, sys, cfg, hash, out)) == 0 ? 0 : kExitFailedChecks;
        }
        sgns::StoredTrajectory st = sgns::load_trajectory(input, hash);
        return emit(out, "diagnose.ndjson", trajectory_records(st.trajectory, sys, cfg, hash)) == 0 ? 0
                                                                                                   : kExitFailedChecks;
    } catch (const sgns::HashMismatchError& e) {
        std::cerr << "refusing to diagnose: " << e.what() << "\n";
        std::cerr << "  file hash:     " << sgns::hash_hex(e.file_hash) << "\n";
        std::cerr << "  expected hash: " << sgns::hash_hex(e.expected_hash) << "\n";
        return kExitInput;
    }
}

void csv_row(std::string& csv, double param, const std::string& stat, double value, double se) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", param, stat.c_str(), value, se);
    csv += buf;
}

int cmd_sweep(const Common& c) {
    sgns::RunConfig cfg = resolve(c);
    const std::uint64_t hash = sgns::config_hash(cfg);
    sgns::GalerkinSystem sys = sgns::build_system(cfg);
    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    write_text(out / "config.json", sgns::emit_config(cfg));
    std::string csv = "parameter,statistic,value,stderr\n";
    std::vector<json> recs;

    if (cfg.sweep.kind == "order") {
        std::vector<int> levels = cfg.sweep.levels;
        if (levels.empty()) levels = {cfg.level, cfg.level + 1, cfg.level + 2};
        sgns::OrderReport r = sgns::order_study(sys, cfg.scheme, sgns::build_initial(cfg, sys.basis), levels, cfg.dt,
                                                cfg.T, cfg.members, cfg.seed, c.threads);
        for (std::size_t q = 0; q < r.dt.size(); ++q) {
            csv_row(csv, r.dt[q], "strong_error", r.error[q].mean, r.error[q].se);
            recs.push_back(json{{"name", "strong_error"}, {"dt", r.dt[q]}, {"value", r.error[q].mean},
                                {"stderr", r.error[q].se}, {"config_hash", sgns::hash_hex(hash)}});
        }
        csv_row(csv, 0.0, "slope", r.slope, 0.0);
        recs.push_back(json{{"name", "order_slope"}, {"value", r.slope}, {"reference_dt", r.reference_dt},
                            {"config_hash", sgns::hash_hex(hash)}});
    } else {
        sgns::SweepPlan plan;
        plan.nu = cfg.sweep.nu.empty() ? std::vector<double>{cfg.nu} : cfg.sweep.nu;
        plan.coupling = cfg.sweep.coupling == "independent" ? sgns::Coupling::Independent : sgns::Coupling::Shared;
        plan.members = cfg.members;
        plan.ensemble = sgns::build_ensemble_config(cfg, c.threads);
        plan.moment_p = cfg.sweep.moment_p;
        plan.gap_battery = std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), "gap_battery") != cfg.diagnostics.end();
        plan.library_seed = cfg.seed;
        plan.point_hash = [cfg](double nu) {
            sgns::RunConfig p = cfg;
            p.nu = nu;
            return sgns::config_hash(p);
        };
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.N()));
        phi[0] = 1.0;
        sgns::SweepReport rep = sgns::viscosity_sweep(plan, sys, sgns::build_initial(cfg, sys.basis), phi);
        for (const auto& p : rep.points) {
            csv_row(csv, p.nu, "sup_moment", p.moments.sup_moment.mean, p.moments.sup_moment.se);
            csv_row(csv, p.nu, "viscous_moment", p.moments.viscous_moment.mean, p.moments.viscous_moment.se);
            csv_row(csv, p.nu, "viscous_functional", p.viscous_functional.mean, p.viscous_functional.se);
            csv_row(csv, p.nu, "weighted_term", p.weighted_term, 0.0);
            csv_row(csv, p.nu, "energy_residual", p.energy_residual.mean, p.energy_residual.se);
            csv_row(csv, p.nu, "cauchy_next", p.cauchy_next, 0.0);
            recs.push_back(json{{"name", "sweep_point"},
                                {"nu", p.nu},
                                {"config_hash", sgns::hash_hex(p.config_hash)},
                                {"sup_moment", p.moments.sup_moment.mean},
                                {"viscous_functional", p.viscous_functional.mean},
                                {"weighted_term", p.weighted_term},
                                {"energy_residual", p.energy_residual.mean},
                                {"cauchy_next", p.cauchy_next},
                                {"blowups", p.blowups}});
        }
        recs.push_back(json{{"name", "sweep_summary"},
                            {"fitted_exponent", rep.fitted_exponent},
                            {"moment_ratio", rep.moment_ratio},
                            {"viscous_bounded", rep.viscous_bounded},
                            {"config_hash", sgns::hash_hex(hash)}});
        for (std::size_t i = 0; i < rep.gaps.size(); ++i) {
            json r = record("gap/" + rep.gap_names[i], 0.0, cfg.T, rep.gaps[i], kReportTolerance, plan.point_hash(plan.nu.back()));
            r["pass"] = rep.gaps[i] <= kReportTolerance;
            recs.push_back(r);
        }
    }
    write_text(out / "sweep.csv", csv);
    return emit(out, "sweep.ndjson", recs) == 0 ? 0 : kExitFailedChecks;
}

int cmd_verify(const Common& c, bool criteria, bool full) {
    sgns::RunConfig cfg = resolve(c);
    sgns::VerifyScale scale;
    scale.full = full;
    scale.threads = c.threads;
    scale.seed = cfg.seed == 0 ? scale.seed : cfg.seed;
    std::vector<sgns::CheckResult> results = sgns::structural_checks(scale);
    results.push_back(sgns::check_convection_skew(scale));
    results.push_back(sgns::check_triad_sparsity(scale));
    results.push_back(sgns::check_transport_energy(scale));
    results.push_back(sgns::check_viscous_decay(scale));
    results.push_back(sgns::check_reynolds_defect(scale));
    results.push_back(sgns::check_determinism(scale));
    if (criteria) {
        for (const auto& r : sgns::run_criteria(scale)) {
            bool dup = false;
            for (const auto& e : results) dup = dup || e.id == r.id;
            if (!dup) results.push_back(r);
        }
    }
    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    std::string text;
    int failed = 0;
    for (const auto& r : results) {
        text += sgns::check_json(r) + "\n";
        if (!r.pass) ++failed;
    }
    write_text(out / "verify.ndjson", text);
    std::cout << text;
    return failed == 0 ? 0 : kExitFailedChecks;
}

int cmd_bench(const Common& c, int dim, std::vector<int> cutoffs, std::size_t reps) {
    sgns::RunConfig cfg = resolve(c);
    std::vector<json> recs;
    if (!c.config.empty()) {
        sgns::GalerkinSystem sys = sgns::build_system(cfg);
        auto r = sgns::kernel_benchmark(sys, reps);
        recs.push_back(json{{"name", "kernel"}, {"cutoff", r.cutoff}, {"N", r.N}, {"nnz", r.nnz}, {"reps", r.reps},
                            {"seconds", r.seconds}, {"contractions_per_second", r.contractions_per_second},
                            {"bytes_per_contraction", r.bytes_per_contraction}});
    } else {
        for (const auto& r : sgns::kernel_benchmark(dim, cutoffs, reps))
            recs.push_back(json{{"name", "kernel"}, {"cutoff", r.cutoff}, {"N", r.N}, {"nnz", r.nnz}, {"reps", r.reps},
                                {"seconds", r.seconds}, {"contractions_per_second", r.contractions_per_second},
                                {"bytes_per_contraction", r.bytes_per_contraction}});
    }
    fs::path out = cfg.output_dir;
    fs::create_directories(out);
    emit(out, "bench.ndjson", recs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic spectral Galerkin solver for the Navier-Stokes and Euler equations"};
    app.require_subcommand(1);
    Common common;

    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
    add_common(simulate, common);
    auto* ensemble = app.add_subcommand("ensemble", "run a Monte-Carlo ensemble");
    add_common(ensemble, common);
    auto* diagnose = app.add_subcommand("diagnose", "run diagnostics on a stored trajectory or ensemble");
    add_common(diagnose, common);
    std::string input;
    diagnose->add_option("input", input, "trajectory file or ensemble member directory")->required();
    auto* sweep = app.add_subcommand("sweep", "viscosity or step-size study");
    add_common(sweep, common);
    auto* verify = app.add_subcommand("verify", "algebraic and oracle invariant suite");
    add_common(verify, common);
    bool criteria = false, full = false;
    verify->add_flag("--criteria", criteria, "also run the statistical acceptance criteria");
    verify->add_flag("--full", full, "use the full-scale setups");
    auto* bench = app.add_subcommand("bench", "triad contraction throughput");
    add_common(bench, common);
    int dim = 2;
    std::vector<int> cutoffs = {1, 2, 3, 4};
    std::size_t reps = 20000;
    bench->add_option("--dim", dim, "dimension")->default_val(2);
    bench->add_option("--cutoffs", cutoffs, "cutoffs to benchmark");
    bench->add_option("--reps", reps, "contractions per cutoff")->default_val(20000);

    if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
        std::cerr << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*simulate) return cmd_simulate(common);
        if (*ensemble) return cmd_ensemble(common);
        if (*diagnose) return cmd_diagnose(common, input);
        if (*sweep) return cmd_sweep(common);
        if (*verify) return cmd_verify(common, criteria, full);
        if (*bench) return cmd_bench(common, dim, cutoffs, reps);
    } catch (const sgns::ConfigError& e) {
        for (const auto& err : e.errors()) std::cerr << "config error: " << err << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cerr << app.help();
    return kExitUsage;
}
