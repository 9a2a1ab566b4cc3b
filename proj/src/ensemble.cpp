#include "cavsim/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cavsim/csv.hpp"
#include "cavsim/errors.hpp"
#include "cavsim/summation.hpp"
#include "cavsim/version.hpp"

namespace cavsim {

int max_workers() {
    if (const char* env = std::getenv("CAVSIM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<const TrajectoryTrace*> EnsembleResult::good_traces() const {
    std::vector<const TrajectoryTrace*> out;
    out.reserve(traces.size());
    for (const auto& tr : traces)
        if (!tr.failed) out.push_back(&tr);
    return out;
}

EnsembleResult run_ensemble(const SimConfig& cfg, const EnsembleOptions& opts) {
    cfg.validate();
    SimConfig effective = cfg;
    if (opts.sample_mode_override)
        effective.sample_mode = *opts.sample_mode_override;

    const Dynamics dyn = Dynamics::from_config(effective);
    IntegratorConfig icfg;
    icfg.dt = effective.dt;
    check_guards(dyn, icfg);

    EnsembleResult result;
    result.schedule = SampleSchedule::from_config(effective);
    result.traces.resize(effective.n_traj);
    result.traj_seeds.resize(effective.n_traj);
    for (int i = 0; i < effective.n_traj; ++i)
        result.traj_seeds[i] = static_cast<std::uint64_t>(i);

    const int n_workers =
        std::min(opts.workers > 0 ? opts.workers : max_workers(),
                 effective.n_traj);
    std::atomic<int> next{0};

    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= effective.n_traj) return;
            SystemState state = initial_ensemble(
                effective, Rng::stream(effective.seed,
                                       static_cast<std::uint64_t>(i)));
            TraceOptions topts;
            topts.record_snapshots = opts.record_snapshots;
            TrajectoryTrace trace =
                integrate_trajectory(state, dyn, icfg, result.schedule, topts);
            trace.traj_index = static_cast<std::uint64_t>(i);
            result.traces[i] = std::move(trace);
        }
    };

    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (const auto& tr : result.traces)
        if (tr.failed) result.failed.push_back(tr.traj_index);
    return result;
}

std::vector<double> pool_stationary(
    const std::vector<const TrajectoryTrace*>& traces, double t_burn,
    const std::vector<double> TrajectoryTrace::* column) {
    std::vector<double> out;
    for (const auto* tr : traces) {
        const auto& col = tr->*column;
        for (std::size_t k = 0; k < tr->t.size(); ++k)
            if (tr->t[k] > t_burn) out.push_back(col[k]);
    }
    return out;
}

std::vector<std::vector<double>> group_stationary(
    const std::vector<const TrajectoryTrace*>& traces, double t_burn,
    const std::vector<double> TrajectoryTrace::* column) {
    std::vector<std::vector<double>> out;
    out.reserve(traces.size());
    for (const auto* tr : traces) {
        std::vector<double> g;
        const auto& col = tr->*column;
        for (std::size_t k = 0; k < tr->t.size(); ++k)
            if (tr->t[k] > t_burn) g.push_back(col[k]);
        if (!g.empty()) out.push_back(std::move(g));
    }
    return out;
}

EnsembleCurve ensemble_mean(const std::vector<const TrajectoryTrace*>& traces,
                            const std::vector<double> TrajectoryTrace::* column,
                            bool absolute_value) {
    EnsembleCurve curve;
    if (traces.empty()) return curve;
    const std::size_t n_times = traces.front()->t.size();
    for (const auto* tr : traces)
        if (tr->t.size() != n_times)
            throw ConfigError("ensemble_mean: traces disagree on schedule");

    curve.t = traces.front()->t;
    curve.mean.resize(n_times);
    curve.stderr_.resize(n_times);
    std::vector<double> vals(traces.size());
    for (std::size_t k = 0; k < n_times; ++k) {
        for (std::size_t j = 0; j < traces.size(); ++j) {
            const double v = (traces[j]->*column)[k];
            vals[j] = absolute_value ? std::abs(v) : v;
        }
        const double m = pairwise_mean(vals);
        curve.mean[k] = m;
        double se = 0.0;
        if (vals.size() > 1) {
            double acc = 0.0;
            for (double v : vals) acc += (v - m) * (v - m);
            se = std::sqrt(acc / (static_cast<double>(vals.size()) *
                                  static_cast<double>(vals.size() - 1)));
        }
        curve.stderr_[k] = se;
    }
    return curve;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["command"] = m.command;
    j["config"] = m.config_text;
    j["master_seed"] = m.master_seed;
    j["traj_seeds"] = m.traj_seeds;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["files"] = nlohmann::json::array();
    for (const auto& f : m.files)
        j["files"].push_back(
            {{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
    std::ofstream out(path);
    if (!out) throw IoError("manifest: cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest: parse failure: ") + e.what());
    }
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.traj_seeds = j.at("traj_seeds").get<std::vector<std::uint64_t>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    for (const auto& f : j.at("files")) {
        RunManifest::FileEntry e;
        e.name = f.at("name").get<std::string>();
        e.bytes = f.at("bytes").get<std::uint64_t>();
        e.fnv1a64 = f.at("fnv1a64").get<std::string>();
        m.files.push_back(std::move(e));
    }
    return m;
}

std::vector<RunManifest::FileEntry> inventory_files(
    const std::string& dir, const std::vector<std::string>& names) {
    std::vector<RunManifest::FileEntry> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        const auto path = std::filesystem::path(dir) / name;
        RunManifest::FileEntry e;
        e.name = name;
        e.bytes = std::filesystem::file_size(path);
        e.fnv1a64 = hex64(fnv1a64_file(path.string()));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace cavsim
