#include "cavsim/integrator.hpp"

#include <algorithm>
#include <cmath>

#include "cavsim/errors.hpp"

namespace cavsim {

namespace {

/// Exact OU update of the collective coordinate q = (s.p)/|s| at frozen
/// positions; s and S2 = mean(s^2) are passed in so callers sharing a
/// sin(x) evaluation pay for it once. One standard normal is always
/// consumed, so the draw count per substep is state-independent.
void dissipator_kick(Eigen::ArrayXd& p, const Eigen::ArrayXd& s, double sin_sq,
                     double dt, const Dynamics& dyn, Rng& rng,
                     double noise_scale) {
    const double xi = rng.normal();
    if (sin_sq <= 0.0) return;  // every atom at a node: exact no-op

    const double a = -dyn.friction_g * sin_sq;  // decay rate, >= 0
    const double sigma_sq = 2.0 * dyn.nbar * sin_sq;
    const double decay = std::exp(-a * dt);
    // OU variance (1 - e^{-2 a dt}) sigma^2 / (2a); -> sigma^2 dt as a -> 0
    const double var =
        a > 0.0 ? sigma_sq * (-std::expm1(-2.0 * a * dt)) / (2.0 * a)
                : sigma_sq * dt;

    const double s_norm =
        std::sqrt(sin_sq * static_cast<double>(p.size()));  // |s|
    const double q = (s * p).sum() / s_norm;
    const double q_new = q * decay + noise_scale * std::sqrt(var) * xi;
    p += ((q_new - q) / s_norm) * s;
}

void euler_maruyama_step(SystemState& state, const Dynamics& dyn,
                         const IntegratorConfig& icfg) {
    const double dt = icfg.dt;
    const Eigen::ArrayXd s = state.x.sin();
    const double theta = order_parameter(state.x);
    const double n = static_cast<double>(dyn.n_atoms);

    const double xi = state.rng.normal();
    Eigen::ArrayXd dp = (dt * 2.0 * dyn.delta_c * dyn.nbar * theta) * s;
    if (icfg.dissipator_enabled) {
        const double ps = (s * state.p).sum() / n;
        dp += (dt * dyn.friction_g * ps) * s;
        dp += (icfg.noise_scale * std::sqrt(2.0 * dyn.nbar / n * dt) * xi) * s;
    }
    state.x += (2.0 * dyn.omega_r * dt) * state.p;
    state.p += dp;
    state.t += dt;
}

}  // namespace

void check_guards(const Dynamics& dyn, const IntegratorConfig& icfg) {
    if (!(icfg.dt > 0.0)) throw ConfigError("integrator: dt must be > 0");
    if (!(icfg.guard_friction > 0.0 && icfg.guard_friction < 1.0) ||
        !(icfg.guard_frequency > 0.0 && icfg.guard_frequency < 1.0))
        throw ConfigError("integrator: guard thresholds must lie in (0, 1)");

    const double g_dt = std::abs(dyn.friction_g) * icfg.dt;
    if (g_dt > icfg.guard_friction)
        throw ConfigError("integrator: |g|*dt = " + std::to_string(g_dt) +
                          " exceeds guard " +
                          std::to_string(icfg.guard_friction));
    // Steepest well frequency, reached at |Theta| = 1.
    const double omega_osc =
        std::sqrt(4.0 * dyn.omega_r * dyn.nbar * std::abs(dyn.delta_c));
    if (omega_osc * icfg.dt > icfg.guard_frequency)
        throw ConfigError("integrator: omega_osc*dt = " +
                          std::to_string(omega_osc * icfg.dt) +
                          " exceeds guard " +
                          std::to_string(icfg.guard_frequency));
}

void hamiltonian_substep(SystemState& state, double dt, const Dynamics& dyn) {
    // velocity Verlet (kick-drift-kick)
    state.p += (0.5 * dt) * forces(state.x, dyn.nbar, dyn.delta_c);
    state.x += (2.0 * dyn.omega_r * dt) * state.p;
    state.p += (0.5 * dt) * forces(state.x, dyn.nbar, dyn.delta_c);
    if (!state.is_finite())
        throw NumericError("hamiltonian_substep: non-finite state at t = " +
                           std::to_string(state.t));
}

void dissipator_substep(SystemState& state, double dt, const Dynamics& dyn,
                        double noise_scale) {
    const Eigen::ArrayXd s = state.x.sin();
    dissipator_kick(state.p, s, s.square().mean(), dt, dyn, state.rng,
                    noise_scale);
}

void step(SystemState& state, const Dynamics& dyn,
          const IntegratorConfig& icfg) {
    if (icfg.scheme == Scheme::kEulerMaruyama) {
        euler_maruyama_step(state, dyn, icfg);
    } else {
        if (icfg.dissipator_enabled)
            dissipator_substep(state, 0.5 * icfg.dt, dyn, icfg.noise_scale);
        hamiltonian_substep(state, icfg.dt, dyn);
        if (icfg.dissipator_enabled)
            dissipator_substep(state, 0.5 * icfg.dt, dyn, icfg.noise_scale);
        state.t += icfg.dt;
    }
    if (!state.is_finite())
        throw NumericError("step: non-finite state at t = " +
                           std::to_string(state.t));
}

SampleSchedule SampleSchedule::linear(double dt, double t_end, int points) {
    SampleSchedule sc;
    sc.dt = dt;
    const auto n_steps =
        static_cast<std::uint64_t>(std::llround(t_end / dt));
    if (n_steps == 0 || points < 1) return sc;
    sc.steps.reserve(points);
    std::uint64_t prev = 0;
    for (int j = 1; j <= points; ++j) {
        const auto k = static_cast<std::uint64_t>(std::llround(
            static_cast<double>(j) * static_cast<double>(n_steps) / points));
        if (k > prev) {
            sc.steps.push_back(k);
            prev = k;
        }
    }
    return sc;
}

SampleSchedule SampleSchedule::logarithmic(double dt, double t_end, int points) {
    SampleSchedule sc;
    sc.dt = dt;
    const auto n_steps =
        static_cast<std::uint64_t>(std::llround(t_end / dt));
    if (n_steps == 0 || points < 1) return sc;
    sc.steps.reserve(points);
    const double log_max = std::log(static_cast<double>(n_steps));
    std::uint64_t prev = 0;
    for (int j = 0; j < points; ++j) {
        const double frac = points == 1 ? 1.0
                                        : static_cast<double>(j) /
                                              static_cast<double>(points - 1);
        const auto k = static_cast<std::uint64_t>(
            std::llround(std::exp(frac * log_max)));
        if (k > prev) {
            sc.steps.push_back(k);
            prev = k;
        }
    }
    if (sc.steps.empty() || sc.steps.back() != n_steps)
        sc.steps.push_back(n_steps);
    return sc;
}

SampleSchedule SampleSchedule::from_config(const SimConfig& cfg) {
    return cfg.sample_mode == SampleMode::kLinear
               ? linear(cfg.dt, cfg.t_end, cfg.sample_points)
               : logarithmic(cfg.dt, cfg.t_end, cfg.sample_points);
}

TrajectoryTrace integrate_trajectory(SystemState& state, const Dynamics& dyn,
                                     const IntegratorConfig& icfg,
                                     const SampleSchedule& schedule,
                                     const TraceOptions& opts) {
    check_guards(dyn, icfg);

    TrajectoryTrace trace;
    const std::size_t n_samples = schedule.steps.size();
    trace.t.reserve(n_samples);
    trace.theta.reserve(n_samples);
    trace.ps.reserve(n_samples);
    trace.ekin.reserve(n_samples);
    trace.photon.reserve(n_samples);

    if (opts.record_snapshots)
        trace.snapshots.push_back(Snapshot{state.t, state.x, state.p, state.rng});

    const double dt = icfg.dt;
    const double half_dt = 0.5 * dt;
    const double force_coef = 2.0 * dyn.delta_c * dyn.nbar;
    const double drift_coef = 2.0 * dyn.omega_r * dt;
    const bool strang = icfg.scheme == Scheme::kStrangOu;
    const bool dissipate = icfg.dissipator_enabled;

    // sin/cos carried across steps; positions only change in the drift.
    Eigen::ArrayXd s = state.x.sin();
    Eigen::ArrayXd c = state.x.cos();
    double sin_sq = s.square().mean();

    std::uint64_t current = 0;
    for (std::uint64_t target : schedule.steps) {
        for (; current < target; ++current) {
            if (strang) {
                if (dissipate)
                    dissipator_kick(state.p, s, sin_sq, half_dt, dyn,
                                    state.rng, icfg.noise_scale);
                state.p += (half_dt * force_coef * c.mean()) * s;
                state.x += drift_coef * state.p;
                s = state.x.sin();
                c = state.x.cos();
                sin_sq = s.square().mean();
                state.p += (half_dt * force_coef * c.mean()) * s;
                if (dissipate)
                    dissipator_kick(state.p, s, sin_sq, half_dt, dyn,
                                    state.rng, icfg.noise_scale);
                state.t += dt;
            } else {
                euler_maruyama_step(state, dyn, icfg);
                s = state.x.sin();
                c = state.x.cos();
                sin_sq = s.square().mean();
            }
        }

        if (!state.is_finite()) {
            trace.failed = true;
            return trace;
        }
        SamplePoint sp;
        sp.t = state.t;
        sp.theta = c.mean();
        sp.ps = (s * state.p).mean();
        sp.ekin = kinetic_energy(state.p, dyn.omega_r);
        sp.photon = photon_proxy(sp.theta, dyn.nbar, dyn.n_atoms);
        trace.t.push_back(sp.t);
        trace.theta.push_back(sp.theta);
        trace.ps.push_back(sp.ps);
        trace.ekin.push_back(sp.ekin);
        trace.photon.push_back(sp.photon);
        if (opts.record_snapshots)
            trace.snapshots.push_back(
                Snapshot{state.t, state.x, state.p, state.rng});
        if (opts.observer) opts.observer(sp, state);
    }
    return trace;
}

}  // namespace cavsim
