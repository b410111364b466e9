#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgns/sde.hpp"

namespace sgns {

struct CheckResult {
    std::string id;    // short key, e.g. "convection_skew"
    std::string name;  // human readable
    bool pass = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

std::string check_json(const CheckResult& r);
std::string check_line(const CheckResult& r);

// Full scale reproduces the acceptance setups; quick scale keeps the same
// tolerances with smaller ensembles and shorter axes for interactive use.
struct VerifyScale {
    bool full = true;
    unsigned threads = 0;
    std::uint64_t seed = 20240611;
};

// 2D system with additive forcing on Brownian modes 0 and 1 and, when
// transport_amp != 0, one transport field on mode 2. Amplitudes scale the
// unit-coefficient noise columns.
GalerkinSystem reference_system(int cutoff, double nu, double additive_amp, double transport_amp);

CheckResult check_convection_skew(const VerifyScale& s);
CheckResult check_triad_sparsity(const VerifyScale& s);
CheckResult check_transport_energy(const VerifyScale& s);
CheckResult check_additive_energy_balance(const VerifyScale& s);
CheckResult check_viscous_decay(const VerifyScale& s);
CheckResult check_scheme_agreement(const VerifyScale& s);
// Moment uniformity and the viscous exponent come from one sweep.
std::vector<CheckResult> check_viscosity_sweep(const VerifyScale& s);
CheckResult check_reynolds_defect(const VerifyScale& s);
CheckResult check_gap_battery(const VerifyScale& s);
CheckResult check_weak_strong(const VerifyScale& s);
CheckResult check_strong_order(const VerifyScale& s);
CheckResult check_determinism(const VerifyScale& s);

// Structural checks against the quadrature oracle (Gram matrix, divergence,
// transport matrices, drift and diffusion, Brownian refinement, Leray).
std::vector<CheckResult> structural_checks(const VerifyScale& s);

using CheckSink = std::function<void(const CheckResult&)>;

// Every criterion in order; results are also streamed to sink as they finish.
std::vector<CheckResult> run_criteria(const VerifyScale& s, const CheckSink& sink = {});

}  // namespace sgns
