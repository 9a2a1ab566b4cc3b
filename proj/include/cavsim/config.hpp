#pragma once

#include <cstdint>
#include <string>

namespace cavsim {

enum class SampleMode { kLinear, kLog };

std::string to_string(SampleMode mode);

/// All physical and numerical control parameters, in dimensionless units:
/// positions in 1/k, momenta in hbar*k, times in 1/kappa, energies and
/// temperatures in hbar*kappa.
struct SimConfig {
    int n_atoms = 0;
    double nbar = -1.0;       ///< pump strength: max intracavity photons per atom
    double delta_c = 0.0;     ///< cavity detuning Delta_c / kappa, must be < 0
    double omega_r = 2.57e-3; ///< recoil frequency omega_r / kappa (Rb-85 D2 default)
    double temp_init = 0.5;   ///< initial k_B T / (hbar kappa)
    double dt = 0.1;          ///< time step, units 1/kappa
    double t_end = 1.0e4;     ///< total integration time, units 1/kappa
    int n_traj = 1;           ///< ensemble size
    std::uint64_t seed = 1;   ///< master seed; per-trajectory streams split from it
    SampleMode sample_mode = SampleMode::kLog;
    int sample_points = 200;

    // Informational only; document the physical regime, never enter the dynamics.
    double gamma_hz = 0.0;
    double delta_a_over_gamma = 0.0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Parse line-oriented `key = value` text ('#' comments, unknown keys
/// rejected, errors carry line numbers). `nbar_rel` is accepted in place of
/// `nbar` and multiplies the derived threshold nbar_c(delta_c).
SimConfig parse_config(const std::string& text);

/// Canonical text form; parse(render(c)) == c.
std::string render_config(const SimConfig& cfg);

bool operator==(const SimConfig& a, const SimConfig& b);

}  // namespace cavsim
