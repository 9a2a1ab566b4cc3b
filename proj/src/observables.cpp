#include "cavsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavsim/errors.hpp"
#include "cavsim/summation.hpp"

namespace cavsim {

Histogram make_histogram(std::span<const double> samples, int bins, double lo,
                         double hi) {
    if (bins < 2) throw ConfigError("histogram: need at least 2 bins");
    if (!(hi > lo)) throw ConfigError("histogram: empty range");

    Histogram h;
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.edges[i] = lo + width * i;
    h.counts.assign(bins, 0.0);
    for (double v : samples) {
        int idx = static_cast<int>(std::floor((v - lo) / width));
        if (v == hi) idx = bins - 1;  // closed upper edge
        if (idx < 0 || idx >= bins) continue;
        h.counts[idx] += 1.0;
        ++h.n_samples;
    }
    h.density.resize(bins);
    const double norm =
        h.n_samples > 0 ? 1.0 / (static_cast<double>(h.n_samples) * width) : 0.0;
    for (int i = 0; i < bins; ++i) h.density[i] = h.counts[i] * norm;
    return h;
}

Histogram theta_histogram(std::span<const double> theta_samples, int bins) {
    return make_histogram(theta_samples, bins, -1.0, 1.0);
}

double kinetic_temperature(std::span<const double> momenta, double omega_r) {
    if (momenta.size() < 2)
        throw ConfigError("kinetic_temperature: need at least 2 samples");
    std::vector<double> sq(momenta.size());
    for (std::size_t i = 0; i < momenta.size(); ++i) sq[i] = momenta[i] * momenta[i];
    return 2.0 * omega_r * pairwise_mean(sq);
}

namespace {

struct CentralMoments {
    double mean, var, m3, m4;
};

CentralMoments central_moments(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    std::vector<double> tmp(v.begin(), v.end());
    const double mean = pairwise_mean(tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = v[i] - mean;
    std::vector<double> pw(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) pw[i] = tmp[i] * tmp[i];
    const double var = pairwise_sum(pw) / n;
    for (std::size_t i = 0; i < tmp.size(); ++i) pw[i] *= tmp[i];
    const double m3 = pairwise_sum(pw) / n;
    for (std::size_t i = 0; i < tmp.size(); ++i) pw[i] *= tmp[i];
    const double m4 = pairwise_sum(pw) / n;
    return {mean, var, m3, m4};
}

}  // namespace

double excess_kurtosis(std::span<const double> samples) {
    if (samples.size() < 4)
        throw ConfigError("excess_kurtosis: need at least 4 samples");
    const auto m = central_moments(samples);
    if (m.var <= 0.0) throw NumericError("excess_kurtosis: zero variance");
    return m.m4 / (m.var * m.var) - 3.0;
}

double skewness(std::span<const double> samples) {
    if (samples.size() < 3)
        throw ConfigError("skewness: need at least 3 samples");
    const auto m = central_moments(samples);
    if (m.var <= 0.0) throw NumericError("skewness: zero variance");
    return m.m3 / std::pow(m.var, 1.5);
}

double susceptibility(std::span<const double> theta_samples) {
    if (theta_samples.empty())
        throw ConfigError("susceptibility: empty input");
    std::vector<double> sq(theta_samples.size()), ab(theta_samples.size());
    for (std::size_t i = 0; i < theta_samples.size(); ++i) {
        sq[i] = theta_samples[i] * theta_samples[i];
        ab[i] = std::abs(theta_samples[i]);
    }
    const double mean_abs = pairwise_mean(ab);
    return pairwise_mean(sq) - mean_abs * mean_abs;
}

MsdCurve msd(const std::vector<TrajectoryTrace>& traces) {
    MsdCurve curve;
    if (traces.empty()) throw ConfigError("msd: no traces");
    const auto& ref = traces.front();
    if (ref.snapshots.size() < 2)
        throw ConfigError("msd: traces carry no snapshots");
    const std::size_t n_times = ref.snapshots.size();

    for (const auto& tr : traces)
        if (tr.snapshots.size() != n_times)
            throw ConfigError("msd: traces disagree on the snapshot schedule");

    // Wrapped-input heuristic: positions that never leave one 2*pi window
    // yet jump by more than pi between consecutive samples were almost
    // certainly folded back into [0, 2*pi) upstream.
    constexpr double kTwoPi = 6.283185307179587;
    for (const auto& tr : traces) {
        bool bounded = true;
        for (const auto& sn : tr.snapshots)
            if (sn.x.minCoeff() < 0.0 || sn.x.maxCoeff() >= kTwoPi) {
                bounded = false;
                break;
            }
        if (!bounded) continue;
        for (std::size_t k = 0; k + 1 < tr.snapshots.size(); ++k) {
            if ((tr.snapshots[k + 1].x - tr.snapshots[k].x).abs().maxCoeff() >
                std::numbers::pi) {
                curve.wrap_warning = true;
                break;
            }
        }
        if (curve.wrap_warning) break;
    }

    curve.t.reserve(n_times - 1);
    curve.msd.reserve(n_times - 1);
    curve.stderr_.reserve(n_times - 1);
    std::vector<double> per_traj(traces.size());
    for (std::size_t k = 1; k < n_times; ++k) {
        for (std::size_t j = 0; j < traces.size(); ++j) {
            const auto& sn = traces[j].snapshots;
            per_traj[j] = (sn[k].x - sn[0].x).square().mean();
        }
        const double m = pairwise_mean(per_traj);
        double se = 0.0;
        if (traces.size() > 1) {
            std::vector<double> dev(per_traj.size());
            for (std::size_t j = 0; j < per_traj.size(); ++j)
                dev[j] = (per_traj[j] - m) * (per_traj[j] - m);
            se = std::sqrt(pairwise_sum(dev) /
                           (static_cast<double>(per_traj.size()) *
                            static_cast<double>(per_traj.size() - 1)));
        }
        curve.t.push_back(ref.snapshots[k].t);
        curve.msd.push_back(m);
        curve.stderr_.push_back(se);
    }
    return curve;
}

PowerLawFit fit_alpha(const MsdCurve& curve, double t_lo, double t_hi) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        if (curve.t[i] < t_lo || curve.t[i] > t_hi) continue;
        if (!(curve.msd[i] > 0.0))
            throw NumericError("fit_alpha: non-positive MSD inside the window");
        lx.push_back(std::log(curve.t[i]));
        ly.push_back(std::log(curve.msd[i]));
    }
    if (lx.size() < 5)
        throw ConfigError("fit_alpha: need >= 5 points in the window, have " +
                          std::to_string(lx.size()));

    const double n = static_cast<double>(lx.size());
    const double mx = pairwise_mean(lx);
    const double my = pairwise_mean(ly);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - my - slope * (lx[i] - mx);
        ss_res += r * r;
    }
    PowerLawFit fit;
    fit.alpha = 0.5 * slope;
    fit.n_points = static_cast<int>(lx.size());
    fit.stderr_ =
        n > 2.0 ? 0.5 * std::sqrt(ss_res / ((n - 2.0) * sxx)) : 0.0;
    return fit;
}

}  // namespace cavsim
