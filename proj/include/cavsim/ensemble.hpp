#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavsim/config.hpp"
#include "cavsim/integrator.hpp"

namespace cavsim {

/// Worker cap: CAVSIM_THREADS if set, else hardware concurrency.
int max_workers();

struct EnsembleOptions {
    bool record_snapshots = false;
    std::optional<SampleMode> sample_mode_override;
    int workers = 0;  ///< 0 = max_workers()
};

struct EnsembleResult {
    std::vector<TrajectoryTrace> traces;      ///< indexed by trajectory
    std::vector<std::uint64_t> failed;        ///< trajectories that went NaN
    SampleSchedule schedule;
    std::vector<std::uint64_t> traj_seeds;    ///< informational (stream ids)

    bool any_failed() const { return !failed.empty(); }
    /// Traces that completed, in trajectory order.
    std::vector<const TrajectoryTrace*> good_traces() const;
};

/// Integrate cfg.n_traj trajectories in parallel. Trajectory i draws its
/// initial conditions and noise from Rng::stream(cfg.seed, i), so the result
/// is bit-identical for any worker count.
EnsembleResult run_ensemble(const SimConfig& cfg,
                            const EnsembleOptions& opts = {});

/// Pool per-trace sample values with t > t_burn, trajectory-major order.
std::vector<double> pool_stationary(const std::vector<const TrajectoryTrace*>& traces,
                                    double t_burn,
                                    const std::vector<double> TrajectoryTrace::* column);

/// Same pooling but keeping per-trajectory grouping (for jackknife).
std::vector<std::vector<double>> group_stationary(
    const std::vector<const TrajectoryTrace*>& traces, double t_burn,
    const std::vector<double> TrajectoryTrace::* column);

/// Ensemble mean/SE of a trace column at every sample time (fixed-order
/// pairwise reduction). All traces must share the schedule.
struct EnsembleCurve {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> stderr_;
};
EnsembleCurve ensemble_mean(const std::vector<const TrajectoryTrace*>& traces,
                            const std::vector<double> TrajectoryTrace::* column,
                            bool absolute_value = false);

/// Reproducibility record: everything needed to rerun bit-exactly plus a
/// checksummed inventory of what was produced.
struct RunManifest {
    std::string version;
    std::string command;
    std::string config_text;  ///< canonical render of the config
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> traj_seeds;
    std::string started_at;
    std::string finished_at;
    struct FileEntry {
        std::string name;
        std::uint64_t bytes = 0;
        std::string fnv1a64;
    };
    std::vector<FileEntry> files;
};

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

/// Scan checksums/sizes of `names` (relative to dir) into manifest entries.
std::vector<RunManifest::FileEntry> inventory_files(
    const std::string& dir, const std::vector<std::string>& names);

}  // namespace cavsim
