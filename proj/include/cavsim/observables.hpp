#pragma once

#include <span>
#include <vector>

#include "cavsim/integrator.hpp"

namespace cavsim {

/// Uniform-bin probability density histogram; counts conserve the sample
/// number and the density integrates to 1.
struct Histogram {
    std::vector<double> edges;    ///< size bins+1
    std::vector<double> counts;   ///< size bins
    std::vector<double> density;  ///< counts / (n_total * width)
    std::size_t n_samples = 0;

    double bin_width() const { return edges[1] - edges[0]; }
};

Histogram make_histogram(std::span<const double> samples, int bins, double lo,
                         double hi);

/// P(Theta) over [-1, 1]; odd default bin count centers a bin at 0.
Histogram theta_histogram(std::span<const double> theta_samples, int bins = 101);

/// T~ = 2 * omega_r * <p^2> (equipartition inverted). Requires >= 2 samples.
double kinetic_temperature(std::span<const double> momenta, double omega_r);

/// <(v - <v>)^4> / Var^2 - 3. Requires >= 4 samples and nonzero variance.
double excess_kurtosis(std::span<const double> samples);

double skewness(std::span<const double> samples);

/// chi = <Theta^2> - <|Theta|>^2 over stationary samples.
double susceptibility(std::span<const double> theta_samples);

struct MsdCurve {
    std::vector<double> t;       ///< sample times, first point at t > 0
    std::vector<double> msd;     ///< <(x(t)-x(0))^2> over atoms and trajectories
    std::vector<double> stderr_; ///< standard error over trajectories
    bool wrap_warning = false;   ///< consecutive jumps look like wrapped input
};

/// Mean squared displacement from snapshot series (unwrapped positions;
/// snapshots[0] is the t=0 baseline). All traces must share the schedule.
MsdCurve msd(const std::vector<TrajectoryTrace>& traces);

struct PowerLawFit {
    double alpha = 0.0;  ///< MSD ~ t^(2*alpha)
    double stderr_ = 0.0;
    int n_points = 0;
};

/// Least-squares slope of log MSD vs log t over [t_lo, t_hi], divided by 2.
/// Requires >= 5 strictly positive MSD points in the window.
PowerLawFit fit_alpha(const MsdCurve& curve, double t_lo, double t_hi);

}  // namespace cavsim
