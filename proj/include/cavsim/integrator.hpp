#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cavsim/config.hpp"
#include "cavsim/physics.hpp"
#include "cavsim/rates.hpp"
#include "cavsim/state.hpp"

namespace cavsim {

enum class Scheme { kStrangOu, kEulerMaruyama };

/// Time stepping controls. `noise_scale` and `dissipator_enabled` are test
/// hooks: production runs always use 1.0 / true.
struct IntegratorConfig {
    double dt = 0.1;
    Scheme scheme = Scheme::kStrangOu;
    double guard_friction = 0.1;   ///< require |g| * dt <= guard
    double guard_frequency = 0.1;  ///< require sqrt(4*omega_r*nbar*|delta_c|) * dt <= guard
    bool dissipator_enabled = true;
    double noise_scale = 1.0;
};

/// Model parameters the stepper needs, all dimensionless.
struct Dynamics {
    Eigen::Index n_atoms = 0;
    double nbar = 0.0;
    double delta_c = 0.0;
    double omega_r = 0.0;
    double friction_g = 0.0;  ///< nbar * Gamma / kappa, <= 0

    static Dynamics from_config(const SimConfig& cfg) {
        const DerivedRates r = derive_rates(cfg);
        return Dynamics{cfg.n_atoms, cfg.nbar, cfg.delta_c, cfg.omega_r,
                        r.friction_g};
    }
};

/// Throws ConfigError if dt resolves neither the friction nor the steepest
/// potential well (estimated at |Theta| = 1).
void check_guards(const Dynamics& dyn, const IntegratorConfig& icfg);

/// One velocity-Verlet step of the conservative motion:
/// dx/dt = 2*omega_r*p, dp/dt = forces(x). Time-reversible, symplectic.
void hamiltonian_substep(SystemState& state, double dt, const Dynamics& dyn);

/// Exact Ornstein-Uhlenbeck update of the collective mode at frozen
/// positions. With s_i = sin(x_i) and unit vector shat = s/|s|, the
/// coordinate q = shat . p decays at a = |g|*S2 with noise variance rate
/// sigma^2 = 2*nbar*S2; the orthogonal momentum components are untouched.
/// All atoms share ONE Wiener increment per call: the noise is rank-1 and
/// long-range correlated by construction. As S2 -> 0 the update becomes an
/// exact no-op (both decay and noise vanish).
void dissipator_substep(SystemState& state, double dt, const Dynamics& dyn,
                        double noise_scale = 1.0);

/// Strang composition dissipator(dt/2) o hamiltonian(dt) o dissipator(dt/2)
/// (or one Euler-Maruyama step when selected); advances state.t by dt.
/// Throws NumericError if the state leaves the finite domain.
void step(SystemState& state, const Dynamics& dyn, const IntegratorConfig& icfg);

/// Observer sample handed to callbacks and recorded in traces.
struct SamplePoint {
    double t = 0.0;
    double theta = 0.0;
    double ps = 0.0;      ///< collective sine momentum
    double ekin = 0.0;    ///< omega_r * sum p^2
    double photon = 0.0;  ///< N * nbar * Theta^2
};

/// Full phase-space record at a sample time; doubles as a resume point.
struct Snapshot {
    double t = 0.0;
    Eigen::ArrayXd x;
    Eigen::ArrayXd p;
    Rng rng;
};

using Observer = std::function<void(const SamplePoint&, const SystemState&)>;

/// Step indices (1-based: sample k fires after step k) for either schedule.
struct SampleSchedule {
    double dt = 0.1;
    std::vector<std::uint64_t> steps;

    static SampleSchedule linear(double dt, double t_end, int points);
    /// Geometric spacing between dt and t_end, deduplicated to whole steps.
    static SampleSchedule logarithmic(double dt, double t_end, int points);
    static SampleSchedule from_config(const SimConfig& cfg);

    std::uint64_t last_step() const { return steps.empty() ? 0 : steps.back(); }
};

struct TrajectoryTrace {
    std::uint64_t traj_index = 0;
    std::vector<double> t;
    std::vector<double> theta;
    std::vector<double> ps;
    std::vector<double> ekin;
    std::vector<double> photon;
    std::vector<Snapshot> snapshots;  ///< populated when requested; [0] is t=0
    bool failed = false;              ///< NaN encountered; trace is partial
    std::size_t size() const { return t.size(); }
};

struct TraceOptions {
    bool record_snapshots = false;
    Observer observer;  ///< optional extra callback at every sample
};

/// Integrate through the whole schedule, recording a sample after each
/// scheduled step. Deterministic given (state.rng, schedule). On NaN the
/// partial trace is returned with `failed` set.
TrajectoryTrace integrate_trajectory(SystemState& state, const Dynamics& dyn,
                                     const IntegratorConfig& icfg,
                                     const SampleSchedule& schedule,
                                     const TraceOptions& opts = {});

}  // namespace cavsim
