#pragma once

#include <string>
#include <vector>

#include "cavsim/errors.hpp"

namespace cavsim {

/// Stationary two-time correlation estimate on a uniform lag grid.
struct CorrelationCurve {
    std::vector<double> tau;     ///< lags, starting at 0, units 1/kappa
    std::vector<double> value;
    std::vector<double> stderr_; ///< standard error over trajectories
    double norm_abs_sq = 0.0;    ///< <|Theta|>^2 (g1 normalization)
    double norm_sq_sq = 0.0;     ///< <Theta^2>^2 (g2 normalization)
};

/// g1(tau) = <Theta(t+tau) Theta(t)> / <|Theta|>^2 over uniformly sampled
/// stationary segments. max_lag counts lag bins and must be < segment size.
CorrelationCurve g1(const std::vector<std::vector<double>>& segments,
                    double dt_sample, int max_lag);

/// g2(tau) = <Theta^2(t+tau) Theta^2(t)> / <Theta^2>^2; the tau=0 entry is
/// g2(0) = <Theta^4>/<Theta^2>^2.
CorrelationCurve g2(const std::vector<std::vector<double>>& segments,
                    double dt_sample, int max_lag);

enum class Window { kHann, kRect };

Window parse_window(const std::string& name);

/// Two-sided intensity spectrum, symmetric omega grid centered on the laser
/// frequency (omega = 0), units of kappa.
struct Spectrum {
    std::vector<double> omega;
    std::vector<double> density;
    std::string window;
    int segment_len = 0;
    double mean_weight = 0.0;  ///< squared mean removed per segment (narrow
                               ///< coherent peak weight, reported separately)
};

/// Welch average of windowed periodograms of Theta(t). Segments are
/// mean-removed before the FFT; segment_len must be a power of two and fit
/// inside every trace. The density integrates (d omega) to the signal
/// variance when the rectangular window is used.
Spectrum spectrum(const std::vector<std::vector<double>>& series,
                  double dt_sample, int segment_len,
                  Window window = Window::kHann);

}  // namespace cavsim
