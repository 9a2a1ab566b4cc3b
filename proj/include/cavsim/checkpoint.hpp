#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cavsim/integrator.hpp"
#include "cavsim/state.hpp"

namespace cavsim {

/// Binary checkpoint, little-endian:
///   magic "CAVS" | u32 version | u64 traj_index | u64 N | f64 t
///   | N x f64 x | N x f64 p | u32 rng_len | rng state bytes
/// Save -> load round-trips bit-identically, including the RNG stream.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& out, const SystemState& state,
                     std::uint64_t traj_index);
void save_checkpoint(const std::string& path, const SystemState& state,
                     std::uint64_t traj_index);

struct LoadedCheckpoint {
    SystemState state;
    std::uint64_t traj_index = 0;
};

/// Throws IoError on bad magic, version mismatch, or truncation.
LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::string& path);

/// Snapshot files are just concatenated checkpoint records.
void save_snapshots(const std::string& path,
                    const std::vector<Snapshot>& snapshots,
                    std::uint64_t traj_index);
std::vector<Snapshot> load_snapshots(const std::string& path);

}  // namespace cavsim
