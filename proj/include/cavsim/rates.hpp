#pragma once

#include <cmath>

#include "cavsim/config.hpp"
#include "cavsim/errors.hpp"

namespace cavsim {

/// Closed-form rates of the model, everything scaled by kappa.
///
/// For delta_c < 0 the friction is negative (damping) and the stationary
/// momentum distribution is thermal at `temp`, which is independent of the
/// pump strength and minimal (= 1/2) at delta_c = -1.
struct DerivedRates {
    double gamma_over_kappa = 0.0;  ///< Gamma/kappa = 8*omega_r*delta_c/(delta_c^2+1)
    double beta_hbar_kappa = 0.0;   ///< hbar*kappa*beta = -4*delta_c/(delta_c^2+1)
    double temp = 0.0;              ///< 1/beta in hbar*kappa/k_B
    double nbar_c = 0.0;            ///< selforganization threshold (1+1/delta_c^2)/4
    double friction_g = 0.0;        ///< nbar*Gamma/kappa, <= 0 in the damped regime
    double diffusion_d0 = 0.0;      ///< nbar/N; exact cancellation of omega_r, delta_c
    double momentum_var_eq = 0.0;   ///< equilibrium Var(p~) = temp/(2*omega_r)
};

inline DerivedRates derive_rates(double nbar, double delta_c, double omega_r,
                                 int n_atoms) {
    if (!(delta_c < 0.0))
        throw ConfigError("derive_rates: delta_c must be < 0 (got " +
                          std::to_string(delta_c) + ")");
    if (!(omega_r > 0.0))
        throw ConfigError("derive_rates: omega_r must be > 0");

    DerivedRates r;
    const double denom = delta_c * delta_c + 1.0;
    r.gamma_over_kappa = 8.0 * omega_r * delta_c / denom;
    r.beta_hbar_kappa = -4.0 * delta_c / denom;
    r.temp = 1.0 / r.beta_hbar_kappa;
    r.nbar_c = 0.25 * (1.0 + 1.0 / (delta_c * delta_c));
    r.friction_g = nbar * r.gamma_over_kappa;
    r.diffusion_d0 = nbar / static_cast<double>(n_atoms);
    r.momentum_var_eq = r.temp / (2.0 * omega_r);
    return r;
}

inline DerivedRates derive_rates(const SimConfig& cfg) {
    cfg.validate();
    return derive_rates(cfg.nbar, cfg.delta_c, cfg.omega_r, cfg.n_atoms);
}

}  // namespace cavsim
