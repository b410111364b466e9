#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgns/ensemble.hpp"
#include "sgns/noise.hpp"
#include "sgns/sde.hpp"

namespace sgns {

std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t h);

struct AdditiveConfig {
    std::size_t mode = 0;
    std::vector<FieldTerm> terms;
};

struct InitialConfig {
    std::string kind = "zero";  // zero | coefficients | terms | random
    std::vector<double> coefficients;
    std::vector<FieldTerm> terms;
    double amplitude = 1.0;
    double decay = 2.0;
};

struct SweepConfig {
    std::string kind = "viscosity";  // viscosity | order
    std::vector<double> nu;
    std::string coupling = "shared";
    std::vector<int> levels;
    double moment_p = 4.0;
};

struct RunConfig {
    int dim = 2;
    int cutoff = 2;
    double nu = 0.1;
    std::size_t brownian_modes = 0;
    int transport_cutoff = 0;  // 0: same as the basis cutoff
    std::vector<AdditiveConfig> additive;
    std::vector<TransportField> transport;
    Scheme scheme = Scheme::Heun;
    double dt = 1e-3;
    int level = 0;
    double T = 1.0;
    InitialConfig initial;
    std::size_t members = 1;
    std::uint64_t seed = 0;
    std::size_t save_stride = 1;
    std::vector<double> probe_times;
    std::vector<std::string> diagnostics;
    std::string output_dir = "out";
    SweepConfig sweep;
};

struct ParseResult {
    RunConfig config;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Validates everything and collects every problem rather than the first.
ParseResult parse_config(const std::string& text, bool strict = true);
RunConfig load_config(const std::string& text, bool strict = true);
RunConfig load_config_file(const std::string& path, bool strict = true);

// Canonical serialization: sorted keys, all defaults explicit. The output
// directory is a runtime location and is left out of the hashed form.
std::string emit_config(const RunConfig& cfg);
std::string hashed_form(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

GalerkinSystem build_system(const RunConfig& cfg);
InitialSampler build_initial(const RunConfig& cfg, const Basis& basis);
PathSpec build_path(const RunConfig& cfg, std::uint64_t seed);
EnsembleConfig build_ensemble_config(const RunConfig& cfg, unsigned threads);

}  // namespace sgns
