#include "cavsim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cavsim/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace cavsim {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'V', 'S'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(std::ostream& out, const SystemState& state,
                     std::uint64_t traj_index) {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, traj_index);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(state.n_atoms()));
    put<double>(out, state.t);
    out.write(reinterpret_cast<const char*>(state.x.data()),
              static_cast<std::streamsize>(sizeof(double) * state.x.size()));
    out.write(reinterpret_cast<const char*>(state.p.data()),
              static_cast<std::streamsize>(sizeof(double) * state.p.size()));
    const auto blob = state.rng.serialize();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(blob.size()));
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("checkpoint: write failed");
}

void save_checkpoint(const std::string& path, const SystemState& state,
                     std::uint64_t traj_index) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open '" + path + "' for writing");
    save_checkpoint(f, state, traj_index);
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("checkpoint: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw IoError("checkpoint: unsupported format version " +
                      std::to_string(version));

    LoadedCheckpoint out;
    out.traj_index = get<std::uint64_t>(in);
    const auto n = get<std::uint64_t>(in);
    if (n > (1ULL << 32)) throw IoError("checkpoint: implausible atom count");
    out.state.t = get<double>(in);
    out.state.x.resize(static_cast<Eigen::Index>(n));
    out.state.p.resize(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(out.state.x.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
    in.read(reinterpret_cast<char*>(out.state.p.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
    if (!in) throw IoError("checkpoint: truncated file");
    const auto rng_len = get<std::uint32_t>(in);
    if (rng_len != Rng::kStateBytes)
        throw IoError("checkpoint: unexpected RNG state size");
    std::array<std::uint8_t, Rng::kStateBytes> blob{};
    in.read(reinterpret_cast<char*>(blob.data()), blob.size());
    if (!in) throw IoError("checkpoint: truncated file");
    out.state.rng = Rng::deserialize(blob.data());
    return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
    return load_checkpoint(f);
}

void save_snapshots(const std::string& path,
                    const std::vector<Snapshot>& snapshots,
                    std::uint64_t traj_index) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("snapshots: cannot open '" + path + "' for writing");
    SystemState tmp;
    for (const auto& sn : snapshots) {
        tmp.x = sn.x;
        tmp.p = sn.p;
        tmp.t = sn.t;
        tmp.rng = sn.rng;
        save_checkpoint(f, tmp, traj_index);
    }
}

std::vector<Snapshot> load_snapshots(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("snapshots: cannot open '" + path + "'");
    std::vector<Snapshot> out;
    while (f.peek() != std::char_traits<char>::eof()) {
        auto cp = load_checkpoint(f);
        out.push_back(Snapshot{cp.state.t, std::move(cp.state.x),
                               std::move(cp.state.p), cp.state.rng});
    }
    return out;
}

}  // namespace cavsim
