#include "sgns/persist.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgns/config.hpp"

namespace sgns {

namespace {

constexpr char kMagic[8] = {'S', 'G', 'N', 'S', 'T', 'R', 'A', 'J'};

class Writer {
public:
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put(bits, 8);
    }
    void raw(const char* p, std::size_t n) { buf_.append(p, n); }
    std::string take() { return std::move(buf_); }

private:
    void put(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string buf_;
};

class Cursor {
public:
    explicit Cursor(const std::string& s) : s_(s) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() {
        std::uint64_t bits = get(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void need(std::size_t n, const char* what) const {
        if (s_.size() - pos_ < n)
            throw TruncatedFileError(std::string("trajectory file truncated while reading ") + what + " (" +
                                     std::to_string(s_.size()) + " bytes present)");
    }
    std::size_t remaining() const { return s_.size() - pos_; }
    std::string raw(std::size_t n) {
        need(n, "raw bytes");
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }

private:
    std::uint64_t get(int bytes) {
        need(static_cast<std::size_t>(bytes), "a field");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }
    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

VersionMismatchError::VersionMismatchError(std::uint32_t f, std::uint32_t e)
    : PersistError("trajectory format version mismatch: file has version " + std::to_string(f) +
                   ", this build reads version " + std::to_string(e)),
      found(f),
      expected(e) {}

HashMismatchError::HashMismatchError(std::uint64_t f, std::uint64_t e)
    : PersistError("configuration hash mismatch: file " + hash_hex(f) + ", expected " + hash_hex(e)),
      file_hash(f),
      expected_hash(e) {}

std::string encode_trajectory(const Trajectory& tr, int dim, std::uint64_t config_hash) {
    const std::size_t n = tr.states.empty() ? 0 : static_cast<std::size_t>(tr.states.front().size());
    Writer w;
    w.raw(kMagic, 8);
    w.u32(kTrajectoryFormatVersion);
    w.u64(config_hash);
    w.u32(static_cast<std::uint32_t>(dim));
    w.u32(static_cast<std::uint32_t>(n));
    w.u64(tr.size());
    w.u64(tr.path.seed);
    w.u32(tr.scheme == Scheme::EulerMaruyama ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(tr.path.level));
    w.f64(tr.path.root_dt);
    w.u64(tr.path.n_steps);
    w.u64(tr.path.modes);
    w.f64(tr.nu);
    w.u32(tr.blew_up ? 1u : 0u);
    w.f64(tr.blowup_time);
    w.f64(tr.sup_kinetic);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        w.u64(tr.steps[i]);
        w.f64(tr.times[i]);
        w.f64(tr.record.E[i]);
        w.f64(tr.record.kinetic[i]);
        w.f64(tr.record.viscous[i]);
        w.f64(tr.record.stochastic[i]);
        w.f64(tr.record.hs[i]);
        w.f64(tr.grad_energy[i]);
        w.f64(tr.grad_integral[i]);
        for (std::size_t j = 0; j < n; ++j) w.f64(tr.states[i][static_cast<Eigen::Index>(j)]);
    }
    return w.take();
}

StoredTrajectory decode_trajectory(const std::string& bytes) {
    Cursor c(bytes);
    c.need(8, "the magic bytes");
    if (c.raw(8) != std::string(kMagic, 8)) throw BadMagicError("not a trajectory file (bad magic bytes)");
    StoredTrajectory st;
    st.version = c.u32();
    if (st.version != kTrajectoryFormatVersion) throw VersionMismatchError(st.version, kTrajectoryFormatVersion);
    st.config_hash = c.u64();
    st.dim = static_cast<int>(c.u32());
    const std::size_t n = c.u32();
    const std::uint64_t records = c.u64();
    Trajectory& tr = st.trajectory;
    tr.path.seed = c.u64();
    tr.scheme = c.u32() == 0 ? Scheme::EulerMaruyama : Scheme::Heun;
    tr.path.level = static_cast<int>(c.u32());
    tr.path.root_dt = c.f64();
    tr.path.n_steps = c.u64();
    tr.path.modes = c.u64();
    tr.nu = c.f64();
    tr.blew_up = c.u32() != 0;
    tr.blowup_time = c.f64();
    tr.sup_kinetic = c.f64();
    if (st.dim != 2 && st.dim != 3) throw PersistError("trajectory header has invalid dimension");

    const std::size_t record_bytes = 8 * (9 + n);
    if (records > c.remaining() / record_bytes + 1)
        throw TruncatedFileError("trajectory file truncated: header announces " + std::to_string(records) +
                                 " records, " + std::to_string(c.remaining()) + " payload bytes present");
    for (std::uint64_t i = 0; i < records; ++i) {
        c.need(record_bytes, "a time record");
        tr.steps.push_back(c.u64());
        tr.times.push_back(c.f64());
        tr.record.E.push_back(c.f64());
        tr.record.kinetic.push_back(c.f64());
        tr.record.viscous.push_back(c.f64());
        tr.record.stochastic.push_back(c.f64());
        tr.record.hs.push_back(c.f64());
        tr.grad_energy.push_back(c.f64());
        tr.grad_integral.push_back(c.f64());
        Eigen::VectorXd a(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) a[static_cast<Eigen::Index>(j)] = c.f64();
        tr.energy.push_back(tr.record.kinetic.back());
        tr.states.push_back(std::move(a));
    }
    if (c.remaining() != 0) throw PersistError("trajectory file has trailing bytes");
    return st;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PersistError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PersistError("cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PersistError("write to '" + path + "' failed");
}

void save_trajectory(const std::string& path, const Trajectory& tr, int dim, std::uint64_t config_hash) {
    write_file(path, encode_trajectory(tr, dim, config_hash));
}

StoredTrajectory load_trajectory(const std::string& path, std::uint64_t expected_hash) {
    StoredTrajectory st = decode_trajectory(read_file(path));
    if (expected_hash != 0 && st.config_hash != expected_hash) throw HashMismatchError(st.config_hash, expected_hash);
    return st;
}

void write_trajectory_summary(const std::string& path, const Trajectory& tr, std::uint64_t config_hash) {
    std::string out;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        nlohmann::json j{{"config_hash", hash_hex(config_hash)},
                         {"t", tr.times[i]},
                         {"energy", tr.energy[i]},
                         {"grad_energy", tr.grad_energy[i]}};
        out += j.dump() + "\n";
    }
    write_file(path, out);
}

void save_ensemble(const std::string& dir, const Ensemble& ens, int dim) {
    std::filesystem::create_directories(dir);
    std::string manifest;
    manifest += nlohmann::json{{"config_hash", hash_hex(ens.config_hash)},
                               {"members", ens.size()},
                               {"base_seed", ens.base_seed},
                               {"format_version", kTrajectoryFormatVersion}}
                    .dump() +
                "\n";
    for (std::size_t m = 0; m < ens.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof name, "member_%05zu.sgt", m);
        save_trajectory((std::filesystem::path(dir) / name).string(), ens.members[m], dim, ens.config_hash);
        manifest += nlohmann::json{{"index", m}, {"seed", ens.seeds[m]}, {"file", name}}.dump() + "\n";
    }
    write_file((std::filesystem::path(dir) / "manifest.ndjson").string(), manifest);
}

}  // namespace sgns
