#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "cavsim/checkpoint.hpp"
#include "cavsim/csv.hpp"
#include "cavsim/ensemble.hpp"
#include "cavsim/errors.hpp"
#include "cavsim/mcmc.hpp"
#include "cavsim/observables.hpp"
#include "cavsim/spectral.hpp"
#include "cavsim/summation.hpp"
#include "cavsim/version.hpp"

namespace fs = std::filesystem;

namespace cavsim {

namespace {

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

std::string traj_name(std::uint64_t i, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "traj_%04llu.%s",
                  static_cast<unsigned long long>(i), ext);
    return buf;
}

SimConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "'");
}

void write_trace_csv(const std::string& path, const TrajectoryTrace& tr) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    CsvWriter w(f, {"t", "theta", "ps", "ekin", "photon"});
    for (std::size_t k = 0; k < tr.size(); ++k)
        w.row({tr.t[k], tr.theta[k], tr.ps[k], tr.ekin[k], tr.photon[k]});
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i + 1 < h.edges.size(); ++i)
        rows.push_back(
            {0.5 * (h.edges[i] + h.edges[i + 1]), h.counts[i], h.density[i]});
    write_csv_file(path, {"center", "count", "density"}, rows);
}

RunManifest start_manifest(const std::string& command, const SimConfig& cfg) {
    RunManifest m;
    m.version = kVersion;
    m.command = command;
    m.config_text = render_config(cfg);
    m.master_seed = cfg.seed;
    m.started_at = now_iso();
    return m;
}

struct MomentRow {
    OracleMoments m;
    double t_kin = 0.0;
};

/// Stationary moments of an ensemble: jackknife over trajectories for the
/// Theta moments, pooled equipartition estimate for the temperature.
MomentRow stationary_moments(const EnsembleResult& res, double t_burn,
                             const SimConfig& cfg) {
    const auto good = res.good_traces();
    MomentRow row;
    row.m = grouped_moments(group_stationary(good, t_burn,
                                             &TrajectoryTrace::theta));
    const auto ekin = pool_stationary(good, t_burn, &TrajectoryTrace::ekin);
    row.t_kin = ekin.empty() ? 0.0
                             : 2.0 * pairwise_mean(ekin) / cfg.n_atoms;
    return row;
}

int finish_run_dir(const std::string& out_dir, RunManifest& manifest,
                   std::vector<std::string> files,
                   const EnsembleResult* res) {
    manifest.finished_at = now_iso();
    manifest.files = inventory_files(out_dir, files);
    write_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    if (res && res->any_failed()) {
        std::cerr << "cavsim: " << res->failed.size()
                  << " trajectories hit non-finite values and were excluded\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------- run ----

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<int> traj) {
    SimConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (traj) cfg.n_traj = *traj;
    cfg.validate();
    if (cfg.sample_mode != SampleMode::kLog)
        throw ConfigError(
            "run: sample_mode must be 'log' (quench observables span decades; "
            "use the spectrum command for uniform sampling)");
    ensure_out_dir(out_dir);

    RunManifest manifest = start_manifest("run", cfg);
    manifest.traj_seeds.resize(cfg.n_traj);
    for (int i = 0; i < cfg.n_traj; ++i) manifest.traj_seeds[i] = i;

    EnsembleOptions opts;
    opts.record_snapshots = true;
    const EnsembleResult res = run_ensemble(cfg, opts);

    std::vector<std::string> files;
    for (const auto& tr : res.traces) {
        const auto csv = traj_name(tr.traj_index, "csv");
        write_trace_csv((fs::path(out_dir) / csv).string(), tr);
        files.push_back(csv);
        if (!tr.snapshots.empty()) {
            const auto snap = traj_name(tr.traj_index, "snap");
            save_snapshots((fs::path(out_dir) / snap).string(), tr.snapshots,
                           tr.traj_index);
            files.push_back(snap);
        }
    }

    const auto good = res.good_traces();
    if (!good.empty()) {
        const auto abs_theta =
            ensemble_mean(good, &TrajectoryTrace::theta, true);
        const auto theta = ensemble_mean(good, &TrajectoryTrace::theta);
        const auto ekin = ensemble_mean(good, &TrajectoryTrace::ekin);
        const auto photon = ensemble_mean(good, &TrajectoryTrace::photon);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < theta.t.size(); ++k)
            rows.push_back({theta.t[k], abs_theta.mean[k], abs_theta.stderr_[k],
                            theta.mean[k], theta.stderr_[k],
                            2.0 * ekin.mean[k] / cfg.n_atoms, photon.mean[k],
                            photon.stderr_[k]});
        write_csv_file((fs::path(out_dir) / "ensemble.csv").string(),
                       {"t", "mean_abs_theta", "stderr_abs_theta", "mean_theta",
                        "stderr_theta", "t_kin", "mean_photon",
                        "stderr_photon"},
                       rows);
        files.push_back("ensemble.csv");
    }
    return finish_run_dir(out_dir, manifest, std::move(files), &res);
}

// --------------------------------------------------------------- scan ----

int cmd_scan(const std::string& config_path, const std::string& out_dir,
             const std::string& param, const std::vector<double>& values,
             std::optional<std::uint64_t> seed, double burn_frac) {
    SimConfig base = load_config(config_path);
    if (seed) base.seed = *seed;
    if (param != "nbar" && param != "nbar_rel")
        throw ConfigError("scan: --param must be 'nbar' or 'nbar_rel'");
    if (values.empty()) throw ConfigError("scan: --values is empty");
    ensure_out_dir(out_dir);

    const double nbar_c =
        derive_rates(0.0, base.delta_c, base.omega_r, 1).nbar_c;

    RunManifest manifest = start_manifest("scan", base);
    std::vector<std::string> files;
    std::vector<std::vector<double>> rows;
    bool numeric_failure = false;

    for (std::size_t i = 0; i < values.size(); ++i) {
        SimConfig cfg = base;
        cfg.nbar = param == "nbar" ? values[i] : values[i] * nbar_c;
        cfg.seed = SplitMix64{base.seed ^ (i + 1)}.next();
        cfg.validate();

        EnsembleOptions opts;
        opts.sample_mode_override = SampleMode::kLinear;  // stationary pooling
        const EnsembleResult res = run_ensemble(cfg, opts);
        numeric_failure |= res.any_failed();

        const double t_burn = burn_frac * cfg.t_end;
        const MomentRow row = stationary_moments(res, t_burn, cfg);
        rows.push_back({cfg.nbar, cfg.nbar / nbar_c, row.m.theta_abs,
                        row.m.theta_abs_err, row.m.theta_sq,
                        row.m.theta_sq_err, row.m.g2_0, row.m.g2_0_err,
                        row.m.chi, row.m.chi_err, row.t_kin,
                        static_cast<double>(row.m.n_samples)});

        const auto pool = pool_stationary(res.good_traces(), t_burn,
                                          &TrajectoryTrace::theta);
        char name[32];
        std::snprintf(name, sizeof(name), "hist_%02zu.csv", i);
        write_histogram_csv((fs::path(out_dir) / name).string(),
                            theta_histogram(pool));
        files.push_back(name);
    }

    write_csv_file((fs::path(out_dir) / "scan.csv").string(),
                   {"nbar", "nbar_rel", "mean_abs_theta", "stderr_abs_theta",
                    "theta_sq", "stderr_theta_sq", "g2_0", "stderr_g2_0",
                    "chi", "stderr_chi", "t_kin", "n_samples"},
                   rows);
    files.push_back("scan.csv");
    const int rc = finish_run_dir(out_dir, manifest, std::move(files), nullptr);
    return numeric_failure ? 2 : rc;
}

// ----------------------------------------------------------- spectrum ----

int cmd_spectrum(const std::string& config_path, const std::string& out_dir,
                 int segment_len, const std::string& window_name,
                 std::optional<std::uint64_t> seed, double burn_frac,
                 int max_lag) {
    SimConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (cfg.sample_mode != SampleMode::kLinear)
        throw ConfigError("spectrum: sample_mode must be 'linear' (the FFT "
                          "needs a uniform grid)");
    const Window window = parse_window(window_name);
    ensure_out_dir(out_dir);

    RunManifest manifest = start_manifest("spectrum", cfg);
    const EnsembleResult res = run_ensemble(cfg);

    const double t_burn = burn_frac * cfg.t_end;
    const double dt_sample = cfg.t_end / cfg.sample_points;
    std::vector<std::vector<double>> segments;
    for (const auto* tr : res.good_traces()) {
        std::vector<double> seg;
        for (std::size_t k = 0; k < tr->t.size(); ++k)
            if (tr->t[k] > t_burn) seg.push_back(tr->theta[k]);
        if (!seg.empty()) segments.push_back(std::move(seg));
    }
    if (segments.empty()) throw NumericError("spectrum: no usable trajectories");

    const Spectrum sp = spectrum(segments, dt_sample, segment_len, window);
    {
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < sp.omega.size(); ++k)
            rows.push_back({sp.omega[k], sp.density[k]});
        write_csv_file((fs::path(out_dir) / "spectrum.csv").string(),
                       {"omega", "density"}, rows);
    }

    const int lag =
        std::min<int>(max_lag, static_cast<int>(segments.front().size()) - 1);
    const auto c1 = g1(segments, dt_sample, lag);
    const auto c2 = g2(segments, dt_sample, lag);
    auto write_corr = [&](const std::string& name, const CorrelationCurve& c) {
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < c.tau.size(); ++k)
            rows.push_back({c.tau[k], c.value[k], c.stderr_[k]});
        write_csv_file((fs::path(out_dir) / name).string(),
                       {"tau", "value", "stderr"}, rows);
    };
    write_corr("g1.csv", c1);
    write_corr("g2.csv", c2);

    return finish_run_dir(out_dir, manifest,
                          {"spectrum.csv", "g1.csv", "g2.csv"}, &res);
}

// ------------------------------------------------------------- oracle ----

int cmd_oracle(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed, double burn_frac,
               int sweeps, int chains, int thin, double ks_bound) {
    SimConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    ensure_out_dir(out_dir);
    RunManifest manifest = start_manifest("oracle", cfg);

    // SDE long-time ensemble
    EnsembleOptions opts;
    opts.sample_mode_override = SampleMode::kLinear;
    const EnsembleResult res = run_ensemble(cfg, opts);
    const double t_burn = burn_frac * cfg.t_end;
    const auto good = res.good_traces();
    const auto sde_groups =
        group_stationary(good, t_burn, &TrajectoryTrace::theta);
    const auto sde_pool =
        pool_stationary(good, t_burn, &TrajectoryTrace::theta);
    if (sde_pool.empty()) throw NumericError("oracle: no SDE samples");
    const OracleMoments sde_m = grouped_moments(sde_groups);

    // equilibrium oracle
    McmcConfig mc;
    mc.n_atoms = cfg.n_atoms;
    mc.nbar = cfg.nbar;
    mc.delta_c = cfg.delta_c;
    mc.omega_r = cfg.omega_r;
    mc.n_sweeps = sweeps;
    mc.burn_in = sweeps / 4;
    mc.thinning = thin;
    mc.n_chains = chains;
    mc.seed = SplitMix64{cfg.seed ^ 0x6f72616b6c65ULL}.next();
    const EquilibriumSamples eq = sample_equilibrium(mc);
    const OracleMoments eq_m = oracle_moments(eq.theta);

    const CompareReport rep =
        compare(sde_pool, sde_m,
                SdeEnsembleInfo{cfg.n_atoms, cfg.nbar, cfg.delta_c}, eq,
                ks_bound);

    auto moment_row = [](double source, const OracleMoments& m) {
        return std::vector<double>{source, m.theta_sq, m.theta_sq_err,
                                   m.theta_abs, m.theta_abs_err, m.theta_4,
                                   m.theta_4_err, m.g2_0, m.g2_0_err, m.chi,
                                   m.chi_err,
                                   static_cast<double>(m.n_samples)};
    };
    write_csv_file((fs::path(out_dir) / "moments.csv").string(),
                   {"source_sde0_oracle1", "theta_sq", "stderr_theta_sq",
                    "theta_abs", "stderr_theta_abs", "theta_4",
                    "stderr_theta_4", "g2_0", "stderr_g2_0", "chi",
                    "stderr_chi", "n_samples"},
                   {moment_row(0, sde_m), moment_row(1, eq_m)});
    write_histogram_csv((fs::path(out_dir) / "hist_sde.csv").string(),
                        theta_histogram(sde_pool));
    write_histogram_csv((fs::path(out_dir) / "hist_oracle.csv").string(),
                        theta_histogram(eq.theta));
    {
        std::ofstream f(fs::path(out_dir) / "report.txt");
        f << rep.to_string() << "\n";
    }

    std::cout << rep.to_string() << "\n";
    const int rc = finish_run_dir(
        out_dir, manifest,
        {"moments.csv", "hist_sde.csv", "hist_oracle.csv", "report.txt"},
        &res);
    if (rc != 0) return rc;
    return rep.pass ? 0 : 3;
}

// ------------------------------------------------------------ analyze ----

int cmd_analyze(const std::string& in_dir, const std::string& out_dir,
                double msd_t_lo, double msd_t_hi,
                std::optional<double> burn_opt) {
    if (!fs::is_directory(in_dir))
        throw ConfigError("analyze: '" + in_dir + "' is not a directory");
    ensure_out_dir(out_dir);

    std::vector<std::string> csvs;
    for (const auto& e : fs::directory_iterator(in_dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("traj_", 0) == 0 && e.path().extension() == ".csv")
            csvs.push_back(e.path().string());
    }
    std::sort(csvs.begin(), csvs.end());
    if (csvs.empty())
        throw ConfigError("analyze: no traj_*.csv files in '" + in_dir + "'");

    std::vector<TrajectoryTrace> traces;
    for (const auto& path : csvs) {
        const CsvTable t = read_csv_file(path);
        TrajectoryTrace tr;
        tr.t = t.column("t");
        tr.theta = t.column("theta");
        tr.ps = t.column("ps");
        tr.ekin = t.column("ekin");
        tr.photon = t.column("photon");
        const auto snap_path = fs::path(path).replace_extension(".snap");
        if (fs::exists(snap_path)) tr.snapshots = load_snapshots(snap_path.string());
        traces.push_back(std::move(tr));
    }

    const double t_last = traces.front().t.back();
    const double t_burn = burn_opt ? *burn_opt : 0.5 * t_last;

    std::vector<const TrajectoryTrace*> ptrs;
    for (const auto& tr : traces) ptrs.push_back(&tr);
    const auto pool = pool_stationary(ptrs, t_burn, &TrajectoryTrace::theta);
    if (!pool.empty())
        write_histogram_csv((fs::path(out_dir) / "theta_hist.csv").string(),
                            theta_histogram(pool));

    const bool have_snapshots = !traces.front().snapshots.empty();
    if (have_snapshots) {
        // momentum excess kurtosis vs time, jackknife over trajectories
        const std::size_t n_times = traces.front().snapshots.size();
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 1; k < n_times; ++k) {
            std::vector<double> all;
            for (const auto& tr : traces)
                for (Eigen::Index i = 0; i < tr.snapshots[k].p.size(); ++i)
                    all.push_back(tr.snapshots[k].p[i]);
            const double kurt = excess_kurtosis(all);
            double err = 0.0;
            if (traces.size() > 1) {
                std::vector<double> jk;
                for (std::size_t d = 0; d < traces.size(); ++d) {
                    std::vector<double> rest;
                    for (std::size_t j = 0; j < traces.size(); ++j) {
                        if (j == d) continue;
                        const auto& p = traces[j].snapshots[k].p;
                        for (Eigen::Index i = 0; i < p.size(); ++i)
                            rest.push_back(p[i]);
                    }
                    jk.push_back(excess_kurtosis(rest));
                }
                const double jm = pairwise_mean(jk);
                double acc = 0.0;
                for (double v : jk) acc += (v - jm) * (v - jm);
                err = std::sqrt(acc * (jk.size() - 1.0) / jk.size());
            }
            rows.push_back({traces.front().snapshots[k].t, kurt, err});
        }
        write_csv_file((fs::path(out_dir) / "kurtosis.csv").string(),
                       {"t", "excess_kurtosis", "stderr"}, rows);

        const MsdCurve curve = msd(traces);
        if (curve.wrap_warning)
            std::cerr << "cavsim: warning: positions look wrapped; MSD is "
                         "unreliable\n";
        std::vector<std::vector<double>> mrows;
        for (std::size_t k = 0; k < curve.t.size(); ++k)
            mrows.push_back({curve.t[k], curve.msd[k], curve.stderr_[k]});
        write_csv_file((fs::path(out_dir) / "msd.csv").string(),
                       {"t", "msd", "stderr"}, mrows);

        const PowerLawFit fit = fit_alpha(curve, msd_t_lo, msd_t_hi);
        write_csv_file((fs::path(out_dir) / "alpha.csv").string(),
                       {"alpha", "stderr", "t_lo", "t_hi", "n_points"},
                       {{fit.alpha, fit.stderr_, msd_t_lo, msd_t_hi,
                         static_cast<double>(fit.n_points)}});
    } else {
        std::cerr << "cavsim: no snapshot files; skipping kurtosis/msd/alpha\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"cavsim: semiclassical dynamics of laser-driven atoms in a "
                 "lossy cavity"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("cavsim v") + kVersion);

    std::string config_path, out_dir, in_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> traj;
    double burn_frac = 0.5;

    auto* run = app.add_subcommand("run", "quench experiment: integrate an "
                                          "ensemble, write traces + snapshots");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--seed", seed, "override master seed");
    run->add_option("--traj", traj, "override trajectory count");

    std::string scan_param = "nbar_rel";
    std::vector<double> scan_values;
    auto* scan = app.add_subcommand(
        "scan", "steady-state sweep over pump strength");
    scan->add_option("--config", config_path, "config file")->required();
    scan->add_option("--out", out_dir, "output directory")->required();
    scan->add_option("--param", scan_param, "nbar or nbar_rel");
    scan->add_option("--values", scan_values, "comma-separated grid")
        ->required()
        ->delimiter(',');
    scan->add_option("--seed", seed, "override master seed");
    scan->add_option("--burn", burn_frac, "burn-in fraction of t_end");

    int segment_len = 1024;
    int max_lag = 512;
    std::string window_name = "hann";
    auto* spec = app.add_subcommand(
        "spectrum", "stationary intensity spectrum and g1/g2 correlations");
    spec->add_option("--config", config_path, "config file")->required();
    spec->add_option("--out", out_dir, "output directory")->required();
    spec->add_option("--segment", segment_len, "FFT segment length (power of 2)");
    spec->add_option("--window", window_name, "hann or rect");
    spec->add_option("--seed", seed, "override master seed");
    spec->add_option("--burn", burn_frac, "burn-in fraction of t_end");
    spec->add_option("--max-lag", max_lag, "correlation lags to keep");

    int sweeps = 60000, chains = 8, thin = 10;
    double ks_bound = 0.08;
    auto* oracle = app.add_subcommand(
        "oracle", "equilibrium Monte Carlo sampler + SDE comparison");
    oracle->add_option("--config", config_path, "config file")->required();
    oracle->add_option("--out", out_dir, "output directory")->required();
    oracle->add_option("--seed", seed, "override master seed");
    oracle->add_option("--burn", burn_frac, "SDE burn-in fraction of t_end");
    oracle->add_option("--sweeps", sweeps, "MCMC sweeps per chain");
    oracle->add_option("--chains", chains, "independent chains");
    oracle->add_option("--thin", thin, "record every k-th sweep");
    oracle->add_option("--ks-bound", ks_bound, "histogram distance bound");

    std::vector<double> msd_window{1e2, 1e4};
    std::optional<double> burn_abs;
    auto* analyze = app.add_subcommand(
        "analyze", "histograms, kurtosis and diffusion exponent from saved traces");
    analyze->add_option("--in", in_dir, "directory with traj_* files")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();
    analyze->add_option("--msd-window", msd_window, "alpha fit window t1,t2")
        ->delimiter(',')
        ->expected(2);
    analyze->add_option("--burn", burn_abs, "burn-in time (default t_end/2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << "cavsim v" << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, traj);
        if (scan->parsed())
            return cmd_scan(config_path, out_dir, scan_param, scan_values,
                            seed, burn_frac);
        if (spec->parsed())
            return cmd_spectrum(config_path, out_dir, segment_len, window_name,
                                seed, burn_frac, max_lag);
        if (oracle->parsed())
            return cmd_oracle(config_path, out_dir, seed, burn_frac, sweeps,
                              chains, thin, ks_bound);
        if (analyze->parsed())
            return cmd_analyze(in_dir, out_dir, msd_window[0], msd_window[1],
                               burn_abs);
    } catch (const ConfigError& e) {
        std::cerr << "cavsim: config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "cavsim: io error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "cavsim: numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("cavsim");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cavsim
