#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sgns/ensemble.hpp"
#include "sgns/sde.hpp"

namespace sgns {

// Trajectory container, all fields little-endian:
//   magic "SGNSTRAJ" | u32 version | u64 config hash | u32 dim | u32 N
//   u64 record count | u64 seed | u32 scheme | u32 level | f64 root_dt
//   u64 n_steps | u64 Brownian modes | f64 nu | u32 blew_up | f64 blowup_time
//   f64 sup_kinetic
// followed by one record per saved time (time-major):
//   u64 step | f64 t | f64 E | f64 kinetic | f64 viscous | f64 stochastic
//   f64 hs | f64 grad_energy | f64 grad_integral | N x f64 state
inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;

class PersistError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public PersistError {
public:
    using PersistError::PersistError;
};

class TruncatedFileError : public PersistError {
public:
    using PersistError::PersistError;
};

class VersionMismatchError : public PersistError {
public:
    VersionMismatchError(std::uint32_t found, std::uint32_t expected);
    std::uint32_t found;
    std::uint32_t expected;
};

class HashMismatchError : public PersistError {
public:
    HashMismatchError(std::uint64_t file_hash, std::uint64_t expected_hash);
    std::uint64_t file_hash;
    std::uint64_t expected_hash;
};

struct StoredTrajectory {
    std::uint32_t version = kTrajectoryFormatVersion;
    std::uint64_t config_hash = 0;
    int dim = 2;
    Trajectory trajectory;
};

std::string encode_trajectory(const Trajectory& tr, int dim, std::uint64_t config_hash);
StoredTrajectory decode_trajectory(const std::string& bytes);

void save_trajectory(const std::string& path, const Trajectory& tr, int dim, std::uint64_t config_hash);
// Validates magic, version, shape and, when expected_hash is nonzero, the
// configuration hash.
StoredTrajectory load_trajectory(const std::string& path, std::uint64_t expected_hash = 0);

// One JSON object per saved time: t, energy, grad_energy.
void write_trajectory_summary(const std::string& path, const Trajectory& tr, std::uint64_t config_hash);

// Member files plus an NDJSON manifest (header line, then one line per member).
void save_ensemble(const std::string& dir, const Ensemble& ens, int dim);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace sgns
