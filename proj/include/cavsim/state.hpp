#pragma once

#include <Eigen/Core>

#include "cavsim/rng.hpp"

namespace cavsim {

/// Phase-space state of the N-atom ensemble member.
///
/// Positions are stored unwrapped (winding retained so mean squared
/// displacement stays meaningful); all trigonometric evaluations are
/// 2*pi-periodic, so wrapping is never needed for the dynamics.
struct SystemState {
    Eigen::ArrayXd x;  ///< positions, units 1/k
    Eigen::ArrayXd p;  ///< momenta, units hbar*k
    double t = 0.0;    ///< time, units 1/kappa
    Rng rng;           ///< integrator noise stream

    Eigen::Index n_atoms() const { return x.size(); }

    bool is_finite() const { return x.allFinite() && p.allFinite(); }
};

}  // namespace cavsim
