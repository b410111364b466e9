#include "sgns/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sgns {

using json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors)), errors_(std::move(errors)) {}

namespace {

const std::set<std::string> kDiagnostics = {"energy_residual", "gap_battery", "reynolds_defect", "moments",
                                            "weak_residual"};

class Reader {
public:
    Reader(ParseResult& r, bool strict) : r_(r), strict_(strict) {}

    void error(const std::string& where, const std::string& msg) { r_.errors.push_back(where + ": " + msg); }

    bool object(const json& j, const std::string& where) {
        if (j.is_object()) return true;
        error(where, "expected an object");
        return false;
    }

    void keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* a : allowed) known = known || it.key() == a;
            if (known) continue;
            std::string msg = where + ": unknown key '" + it.key() + "'";
            if (strict_)
                r_.errors.push_back(msg);
            else
                r_.warnings.push_back(msg);
        }
    }

    template <class T>
    void get(const json& j, const char* key, T& out, const std::string& where) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
                out = v.get<double>();
            } else if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
                out = v.get<int>();
            } else if constexpr (std::is_same_v<T, std::size_t>) {
                if (!v.is_number_integer() || v.get<long long>() < 0)
                    throw std::invalid_argument("expected a non-negative integer");
                out = v.get<std::size_t>();
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                if (!v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
                out = v.get<std::uint64_t>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
                out = v.get<std::string>();
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!v.is_array()) throw std::invalid_argument("expected an array of numbers");
                out.clear();
                for (const auto& e : v) {
                    if (!e.is_number()) throw std::invalid_argument("expected an array of numbers");
                    out.push_back(e.get<double>());
                }
            } else if constexpr (std::is_same_v<T, std::vector<int>>) {
                if (!v.is_array()) throw std::invalid_argument("expected an array of integers");
                out.clear();
                for (const auto& e : v) {
                    if (!e.is_number_integer()) throw std::invalid_argument("expected an array of integers");
                    out.push_back(e.get<int>());
                }
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                if (!v.is_array()) throw std::invalid_argument("expected an array of strings");
                out.clear();
                for (const auto& e : v) {
                    if (!e.is_string()) throw std::invalid_argument("expected an array of strings");
                    out.push_back(e.get<std::string>());
                }
            }
        } catch (const std::exception& e) {
            error(where + "." + key, e.what());
        }
    }

    std::vector<FieldTerm> terms(const json& j, const std::string& where) {
        std::vector<FieldTerm> out;
        if (!j.is_array()) {
            error(where, "expected an array of terms");
            return out;
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            std::string w = where + "[" + std::to_string(i) + "]";
            const json& t = j[i];
            if (!object(t, w)) continue;
            keys(t, w, {"k", "pol", "phase", "amp"});
            FieldTerm ft;
            if (!t.contains("k") || !t["k"].is_array() || t["k"].size() < 2 || t["k"].size() > 3) {
                error(w + ".k", "expected an integer vector of length 2 or 3");
            } else {
                for (std::size_t c = 0; c < t["k"].size(); ++c) {
                    if (!t["k"][c].is_number_integer()) {
                        error(w + ".k", "expected integer components");
                        break;
                    }
                    ft.k[c] = t["k"][c].get<int>();
                }
            }
            get(t, "pol", ft.pol, w);
            std::string phase = "cos";
            get(t, "phase", phase, w);
            if (phase == "cos")
                ft.phase = Phase::Cos;
            else if (phase == "sin")
                ft.phase = Phase::Sin;
            else
                error(w + ".phase", "expected 'cos' or 'sin'");
            if (!t.contains("amp")) error(w + ".amp", "missing amplitude");
            get(t, "amp", ft.amp, w);
            if (!std::isfinite(ft.amp)) error(w + ".amp", "amplitude must be finite");
            out.push_back(ft);
        }
        return out;
    }

private:
    ParseResult& r_;
    bool strict_;
};

void validate_term(Reader& rd, const FieldTerm& t, int dim, int cutoff, const std::string& where) {
    if (dim == 2 && t.k[2] != 0) rd.error(where, "wavevector has a third component in 2D");
    auto [c, sign] = canonicalize(t.k);
    if (sign == 0)
        rd.error(where, "zero wavevector (mean-free fields only)");
    else if (sign < 0)
        rd.error(where, "wavevector must be canonical (first nonzero component positive)");
    if (max_abs(t.k) > cutoff) rd.error(where, "wavevector exceeds cutoff " + std::to_string(cutoff));
    int npol = dim == 2 ? 1 : 2;
    if (t.pol < 0 || t.pol >= npol) rd.error(where, "polarization index out of range");
}

json term_json(const FieldTerm& t, int dim) {
    json k = json::array();
    for (int c = 0; c < dim; ++c) k.push_back(t.k[c]);
    return json{{"k", k}, {"pol", t.pol}, {"phase", t.phase == Phase::Cos ? "cos" : "sin"}, {"amp", t.amp}};
}

}  // namespace

ParseResult parse_config(const std::string& text, bool strict) {
    ParseResult r;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        r.errors.push_back(std::string("document: not valid JSON (") + e.what() + ")");
        return r;
    }
    Reader rd(r, strict);
    if (!rd.object(doc, "document")) return r;
    RunConfig& c = r.config;
    rd.keys(doc, "document", {"basis", "nu", "noise", "scheme", "time", "initial", "ensemble", "diagnostics",
                              "output_dir", "sweep"});

    if (doc.contains("basis") && rd.object(doc["basis"], "basis")) {
        rd.keys(doc["basis"], "basis", {"dim", "cutoff"});
        rd.get(doc["basis"], "dim", c.dim, "basis");
        rd.get(doc["basis"], "cutoff", c.cutoff, "basis");
    }
    if (c.dim != 2 && c.dim != 3) rd.error("basis.dim", "must be 2 or 3");
    if (c.cutoff < 1) rd.error("basis.cutoff", "must be >= 1");
    rd.get(doc, "nu", c.nu, "document");
    if (!(c.nu >= 0.0) || !std::isfinite(c.nu)) rd.error("nu", "viscosity must be finite and non-negative");

    bool k_given = false;
    if (doc.contains("noise") && rd.object(doc["noise"], "noise")) {
        const json& nz = doc["noise"];
        rd.keys(nz, "noise", {"brownian_modes", "transport_cutoff", "additive", "transport"});
        k_given = nz.contains("brownian_modes");
        rd.get(nz, "brownian_modes", c.brownian_modes, "noise");
        rd.get(nz, "transport_cutoff", c.transport_cutoff, "noise");
        for (const char* kind : {"additive", "transport"}) {
            if (!nz.contains(kind)) continue;
            const json& arr = nz[kind];
            std::string where = std::string("noise.") + kind;
            if (!arr.is_array()) {
                rd.error(where, "expected an array");
                continue;
            }
            for (std::size_t i = 0; i < arr.size(); ++i) {
                std::string w = where + "[" + std::to_string(i) + "]";
                if (!rd.object(arr[i], w)) continue;
                rd.keys(arr[i], w, {"mode", "terms"});
                std::size_t mode = 0;
                if (!arr[i].contains("mode")) rd.error(w + ".mode", "missing Brownian mode index");
                rd.get(arr[i], "mode", mode, w);
                std::vector<FieldTerm> t;
                if (arr[i].contains("terms")) t = rd.terms(arr[i]["terms"], w + ".terms");
                if (std::string(kind) == "additive")
                    c.additive.push_back({mode, t});
                else
                    c.transport.push_back({mode, t});
            }
        }
    }
    if (c.transport_cutoff < 0) rd.error("noise.transport_cutoff", "must be >= 0");
    const int tcut = c.transport_cutoff > 0 ? c.transport_cutoff : c.cutoff;
    std::size_t max_mode = 0;
    bool any_mode = false;
    for (const auto& a : c.additive) {
        max_mode = std::max(max_mode, a.mode);
        any_mode = true;
    }
    for (const auto& t : c.transport) {
        max_mode = std::max(max_mode, t.ell);
        any_mode = true;
    }
    if (!k_given) c.brownian_modes = any_mode ? max_mode + 1 : 0;
    std::set<std::size_t> additive_support, transport_support;
    for (std::size_t i = 0; i < c.additive.size(); ++i) {
        std::string w = "noise.additive[" + std::to_string(i) + "]";
        if (c.additive[i].mode >= c.brownian_modes)
            rd.error(w + ".mode", "Brownian mode " + std::to_string(c.additive[i].mode) + " out of range (K = " +
                                      std::to_string(c.brownian_modes) + ")");
        bool nonzero = false;
        for (std::size_t q = 0; q < c.additive[i].terms.size(); ++q) {
            validate_term(rd, c.additive[i].terms[q], c.dim, c.cutoff, w + ".terms[" + std::to_string(q) + "]");
            nonzero = nonzero || c.additive[i].terms[q].amp != 0.0;
        }
        if (nonzero) additive_support.insert(c.additive[i].mode);
    }
    std::set<std::size_t> seen_transport;
    for (std::size_t i = 0; i < c.transport.size(); ++i) {
        std::string w = "noise.transport[" + std::to_string(i) + "]";
        if (c.transport[i].ell >= c.brownian_modes)
            rd.error(w + ".mode", "Brownian mode " + std::to_string(c.transport[i].ell) + " out of range (K = " +
                                      std::to_string(c.brownian_modes) + ")");
        if (!seen_transport.insert(c.transport[i].ell).second)
            rd.error(w + ".mode", "Brownian mode " + std::to_string(c.transport[i].ell) + " carries two transport fields");
        bool nonzero = false;
        for (std::size_t q = 0; q < c.transport[i].terms.size(); ++q) {
            validate_term(rd, c.transport[i].terms[q], c.dim, tcut, w + ".terms[" + std::to_string(q) + "]");
            nonzero = nonzero || c.transport[i].terms[q].amp != 0.0;
        }
        if (nonzero) transport_support.insert(c.transport[i].ell);
    }
    for (std::size_t m : additive_support)
        if (transport_support.count(m))
            rd.error("noise", "additive and transport noise overlap on Brownian mode " + std::to_string(m));

    std::string scheme = scheme_name(c.scheme);
    rd.get(doc, "scheme", scheme, "document");
    try {
        c.scheme = parse_scheme(scheme);
    } catch (const std::exception& e) {
        rd.error("scheme", e.what());
    }

    if (doc.contains("time") && rd.object(doc["time"], "time")) {
        rd.keys(doc["time"], "time", {"dt", "level", "T"});
        rd.get(doc["time"], "dt", c.dt, "time");
        rd.get(doc["time"], "level", c.level, "time");
        rd.get(doc["time"], "T", c.T, "time");
    }
    bool time_ok = true;
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) {
        rd.error("time.dt", "must be positive");
        time_ok = false;
    }
    if (c.level < 0 || c.level > 30) {
        rd.error("time.level", "must lie in [0, 30]");
        time_ok = false;
    }
    if (!(c.T >= 0.0) || !std::isfinite(c.T)) {
        rd.error("time.T", "must be non-negative");
        time_ok = false;
    }
    double fine_dt = time_ok ? std::ldexp(c.dt, -c.level) : 1.0;
    if (time_ok) {
        double steps = c.T / fine_dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            rd.error("time.T", "horizon is not a multiple of the step dt / 2^level");
    }

    if (doc.contains("initial") && rd.object(doc["initial"], "initial")) {
        const json& in = doc["initial"];
        rd.keys(in, "initial", {"kind", "coefficients", "terms", "amplitude", "decay"});
        rd.get(in, "kind", c.initial.kind, "initial");
        rd.get(in, "coefficients", c.initial.coefficients, "initial");
        if (in.contains("terms")) c.initial.terms = rd.terms(in["terms"], "initial.terms");
        rd.get(in, "amplitude", c.initial.amplitude, "initial");
        rd.get(in, "decay", c.initial.decay, "initial");
    }
    const std::set<std::string> kinds = {"zero", "coefficients", "terms", "random"};
    if (!kinds.count(c.initial.kind)) rd.error("initial.kind", "expected zero, coefficients, terms or random");
    for (std::size_t q = 0; q < c.initial.terms.size(); ++q)
        validate_term(rd, c.initial.terms[q], c.dim, c.cutoff, "initial.terms[" + std::to_string(q) + "]");
    if (c.initial.kind == "coefficients" && (c.dim == 2 || c.dim == 3) && c.cutoff >= 1) {
        std::size_t n = Basis::build(c.dim, c.cutoff).size();
        if (c.initial.coefficients.size() != n)
            rd.error("initial.coefficients", "expected " + std::to_string(n) + " coefficients, got " +
                                                 std::to_string(c.initial.coefficients.size()));
    }
    if (!(c.initial.amplitude >= 0.0)) rd.error("initial.amplitude", "must be non-negative");

    if (doc.contains("ensemble") && rd.object(doc["ensemble"], "ensemble")) {
        const json& en = doc["ensemble"];
        rd.keys(en, "ensemble", {"members", "seed", "save_stride", "probe_times"});
        rd.get(en, "members", c.members, "ensemble");
        rd.get(en, "seed", c.seed, "ensemble");
        rd.get(en, "save_stride", c.save_stride, "ensemble");
        rd.get(en, "probe_times", c.probe_times, "ensemble");
    }
    if (c.members < 1) rd.error("ensemble.members", "must be >= 1");
    std::sort(c.probe_times.begin(), c.probe_times.end());
    for (double t : c.probe_times) {
        double x = t / fine_dt;
        if (t < 0.0 || t > c.T + 1e-12 || std::abs(x - std::round(x)) > 1e-6)
            rd.error("ensemble.probe_times", "time " + std::to_string(t) + " is not on the step grid within [0, T]");
    }

    rd.get(doc, "diagnostics", c.diagnostics, "document");
    for (const auto& d : c.diagnostics)
        if (!kDiagnostics.count(d)) rd.error("diagnostics", "unknown diagnostic '" + d + "'");
    rd.get(doc, "output_dir", c.output_dir, "document");

    if (doc.contains("sweep") && rd.object(doc["sweep"], "sweep")) {
        const json& sw = doc["sweep"];
        rd.keys(sw, "sweep", {"kind", "nu", "coupling", "levels", "moment_p"});
        rd.get(sw, "kind", c.sweep.kind, "sweep");
        rd.get(sw, "nu", c.sweep.nu, "sweep");
        rd.get(sw, "coupling", c.sweep.coupling, "sweep");
        rd.get(sw, "levels", c.sweep.levels, "sweep");
        rd.get(sw, "moment_p", c.sweep.moment_p, "sweep");
    }
    if (c.sweep.kind != "viscosity" && c.sweep.kind != "order") rd.error("sweep.kind", "expected viscosity or order");
    if (c.sweep.coupling != "shared" && c.sweep.coupling != "independent")
        rd.error("sweep.coupling", "expected shared or independent");
    for (std::size_t i = 0; i < c.sweep.nu.size(); ++i) {
        if (!(c.sweep.nu[i] > 0.0)) rd.error("sweep.nu", "values must be positive");
        if (i > 0 && !(c.sweep.nu[i] < c.sweep.nu[i - 1])) rd.error("sweep.nu", "axis must be strictly decreasing");
    }
    for (std::size_t i = 1; i < c.sweep.levels.size(); ++i)
        if (c.sweep.levels[i] != c.sweep.levels[i - 1] + 1) rd.error("sweep.levels", "levels must be consecutive");
    if (!(c.sweep.moment_p >= 2.0)) rd.error("sweep.moment_p", "must be >= 2");
    return r;
}

RunConfig load_config(const std::string& text, bool strict) {
    ParseResult r = parse_config(text, strict);
    if (!r.ok()) throw ConfigError(r.errors);
    return r.config;
}

RunConfig load_config_file(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str(), strict);
}

namespace {

json to_json(const RunConfig& c) {
    json noise;
    noise["brownian_modes"] = c.brownian_modes;
    noise["transport_cutoff"] = c.transport_cutoff;
    json add = json::array(), tr = json::array();
    for (const auto& a : c.additive) {
        json terms = json::array();
        for (const auto& t : a.terms) terms.push_back(term_json(t, c.dim));
        add.push_back({{"mode", a.mode}, {"terms", terms}});
    }
    for (const auto& f : c.transport) {
        json terms = json::array();
        for (const auto& t : f.terms) terms.push_back(term_json(t, c.dim));
        tr.push_back({{"mode", f.ell}, {"terms", terms}});
    }
    noise["additive"] = add;
    noise["transport"] = tr;

    json init;
    init["kind"] = c.initial.kind;
    init["coefficients"] = c.initial.coefficients;
    json iterms = json::array();
    for (const auto& t : c.initial.terms) iterms.push_back(term_json(t, c.dim));
    init["terms"] = iterms;
    init["amplitude"] = c.initial.amplitude;
    init["decay"] = c.initial.decay;

    json doc;
    doc["basis"] = {{"dim", c.dim}, {"cutoff", c.cutoff}};
    doc["nu"] = c.nu;
    doc["noise"] = noise;
    doc["scheme"] = scheme_name(c.scheme);
    doc["time"] = {{"dt", c.dt}, {"level", c.level}, {"T", c.T}};
    doc["initial"] = init;
    doc["ensemble"] = {{"members", c.members}, {"seed", c.seed}, {"save_stride", c.save_stride},
                       {"probe_times", c.probe_times}};
    doc["diagnostics"] = c.diagnostics;
    doc["sweep"] = {{"kind", c.sweep.kind},
                    {"nu", c.sweep.nu},
                    {"coupling", c.sweep.coupling},
                    {"levels", c.sweep.levels},
                    {"moment_p", c.sweep.moment_p}};
    return doc;
}

}  // namespace

std::string hashed_form(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string emit_config(const RunConfig& cfg) {
    json doc = to_json(cfg);
    doc["output_dir"] = cfg.output_dir;
    return doc.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(hashed_form(cfg)); }

GalerkinSystem build_system(const RunConfig& cfg) {
    Basis basis = Basis::build(cfg.dim, cfg.cutoff);
    std::vector<std::pair<std::size_t, std::vector<FieldTerm>>> add;
    for (const auto& a : cfg.additive) add.emplace_back(a.mode, a.terms);
    int tcut = cfg.transport_cutoff > 0 ? cfg.transport_cutoff : cfg.cutoff;
    NoiseSpec noise = make_noise(basis, cfg.brownian_modes, add, cfg.transport, tcut);
    return make_system(basis, std::move(noise), cfg.nu);
}

InitialSampler build_initial(const RunConfig& cfg, const Basis& basis) {
    const auto& in = cfg.initial;
    if (in.kind == "zero") return fixed_initial(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size())));
    if (in.kind == "coefficients") {
        if (in.coefficients.size() != basis.size()) throw ConfigError({"initial.coefficients: wrong length"});
        return fixed_initial(Eigen::Map<const Eigen::VectorXd>(in.coefficients.data(),
                                                               static_cast<Eigen::Index>(in.coefficients.size())));
    }
    if (in.kind == "terms") return fixed_initial(terms_to_coefficients(basis, in.terms));
    return gaussian_initial(basis, in.amplitude, in.decay);
}

PathSpec build_path(const RunConfig& cfg, std::uint64_t seed) {
    return make_path(seed, cfg.T, cfg.dt, cfg.level, cfg.brownian_modes);
}

EnsembleConfig build_ensemble_config(const RunConfig& cfg, unsigned threads) {
    EnsembleConfig e;
    e.T = cfg.T;
    e.root_dt = cfg.dt;
    e.level = cfg.level;
    e.scheme = cfg.scheme;
    e.save_stride = cfg.save_stride;
    e.probe_times = cfg.probe_times;
    e.keep_integrals = std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), "weak_residual") != cfg.diagnostics.end();
    e.threads = threads;
    e.base_seed = cfg.seed;
    e.config_hash = config_hash(cfg);
    return e;
}

}  // namespace sgns
