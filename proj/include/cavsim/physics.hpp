#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "cavsim/config.hpp"
#include "cavsim/rates.hpp"
#include "cavsim/state.hpp"

namespace cavsim {

/// Order parameter Theta = (1/N) sum_j cos(x_j), in [-1, 1]. |Theta| = 1 is
/// a perfect Bragg grating, Theta = 0 the unordered phase.
template <typename Derived>
typename Derived::Scalar order_parameter(const Eigen::ArrayBase<Derived>& x) {
    return x.cos().mean();
}

/// Collective sine-weighted momentum P_s = (1/N) sum_j sin(x_j) p_j, the
/// mode the cavity friction and noise act on.
template <typename DX, typename DP>
typename DX::Scalar collective_sine_momentum(const Eigen::ArrayBase<DX>& x,
                                             const Eigen::ArrayBase<DP>& p) {
    return (x.sin() * p.derived()).mean();
}

/// S2 = (1/N) sum_j sin^2(x_j); controls both the friction and the noise
/// strength, and vanishes when all atoms sit at field nodes.
template <typename Derived>
typename Derived::Scalar sin_sq_mean(const Eigen::ArrayBase<Derived>& x) {
    return x.sin().square().mean();
}

/// H~ = omega_r * sum p~^2 + delta_c * nbar * N * Theta^2, in hbar*kappa.
/// Leading order in |N U / Delta_c|; extensive by the 1/N in Theta.
template <typename DX, typename DP>
double energy(const Eigen::ArrayBase<DX>& x, const Eigen::ArrayBase<DP>& p,
              double nbar, double delta_c, double omega_r) {
    const double theta = order_parameter(x);
    return omega_r * p.derived().square().sum() +
           delta_c * nbar * static_cast<double>(x.size()) * theta * theta;
}

inline double energy(const SystemState& s, const SimConfig& cfg) {
    return energy(s.x, s.p, cfg.nbar, cfg.delta_c, cfg.omega_r);
}

/// Momentum drift F~_i = 2 * delta_c * nbar * Theta * sin(x_i), i.e.
/// -dH~/dx_i with the 1/N of Theta cancelling one factor of N.
template <typename Derived>
Eigen::ArrayXd forces(const Eigen::ArrayBase<Derived>& x, double nbar,
                      double delta_c) {
    const double theta = order_parameter(x);
    return (2.0 * delta_c * nbar * theta) * x.sin();
}

inline Eigen::ArrayXd forces(const SystemState& s, const SimConfig& cfg) {
    return forces(s.x, cfg.nbar, cfg.delta_c);
}

/// Intracavity photon number N * nbar * Theta^2 (proportionality constant
/// fixed to 1; only relative photon numbers are meaningful).
inline double photon_proxy(double theta, double nbar, Eigen::Index n_atoms) {
    return static_cast<double>(n_atoms) * nbar * theta * theta;
}

/// Kinetic part of H~, omega_r * sum p~^2.
template <typename Derived>
double kinetic_energy(const Eigen::ArrayBase<Derived>& p, double omega_r) {
    return omega_r * p.derived().square().sum();
}

/// Spatially uniform positions on [0, 2*pi) and thermal momenta at
/// temp_init: Var(p~) = temp_init/(2*omega_r).
inline SystemState initial_ensemble(const SimConfig& cfg, Rng rng) {
    SystemState s;
    s.x.resize(cfg.n_atoms);
    s.p.resize(cfg.n_atoms);
    const double p_sigma = std::sqrt(cfg.temp_init / (2.0 * cfg.omega_r));
    for (int i = 0; i < cfg.n_atoms; ++i)
        s.x[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < cfg.n_atoms; ++i) s.p[i] = p_sigma * rng.normal();
    s.t = 0.0;
    s.rng = rng;
    return s;
}

}  // namespace cavsim
