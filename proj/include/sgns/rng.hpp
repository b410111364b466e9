#pragma once

#include <array>
#include <cstdint>

namespace sgns {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Standard normal sample addressed by (seed, a, b, c, d); pure function.
double counter_normal(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                      std::uint32_t d);

// Uniform in (0, 1), same addressing.
double counter_uniform(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                       std::uint32_t d);

}  // namespace sgns
