#include "cavsim/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cavsim/summation.hpp"

namespace cavsim {

namespace {

/// Lag-averaged product correlator over one segment:
/// c_k = (1/(L-k)) sum_t f(x_t) f(x_{t+k}).
std::vector<double> raw_correlation(const std::vector<double>& seg, int max_lag,
                                    bool square_signal) {
    const int len = static_cast<int>(seg.size());
    std::vector<double> v(seg);
    if (square_signal)
        for (auto& x : v) x *= x;
    std::vector<double> corr(max_lag + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (int t = 0; t + k < len; ++t) acc += v[t] * v[t + k];
        corr[k] = acc / static_cast<double>(len - k);
    }
    return corr;
}

CorrelationCurve correlation_impl(const std::vector<std::vector<double>>& segments,
                                  double dt_sample, int max_lag,
                                  bool square_signal) {
    if (segments.empty())
        throw ConfigError("correlation: no input segments");
    for (const auto& seg : segments)
        if (static_cast<int>(seg.size()) <= max_lag)
            throw ConfigError("correlation: max_lag >= segment length");
    if (max_lag < 0) throw ConfigError("correlation: negative max_lag");

    // normalization moments pooled over every sample of every segment
    std::vector<double> abs_vals, sq_vals;
    for (const auto& seg : segments)
        for (double x : seg) {
            abs_vals.push_back(std::abs(x));
            sq_vals.push_back(x * x);
        }
    const double mean_abs = pairwise_mean(abs_vals);
    const double mean_sq = pairwise_mean(sq_vals);

    CorrelationCurve out;
    out.norm_abs_sq = mean_abs * mean_abs;
    out.norm_sq_sq = mean_sq * mean_sq;
    const double norm = square_signal ? out.norm_sq_sq : out.norm_abs_sq;

    const std::size_t n_seg = segments.size();
    std::vector<std::vector<double>> per_seg(n_seg);
    for (std::size_t j = 0; j < n_seg; ++j)
        per_seg[j] = raw_correlation(segments[j], max_lag, square_signal);

    out.tau.resize(max_lag + 1);
    out.value.resize(max_lag + 1);
    out.stderr_.resize(max_lag + 1);
    std::vector<double> column(n_seg);
    for (int k = 0; k <= max_lag; ++k) {
        for (std::size_t j = 0; j < n_seg; ++j) column[j] = per_seg[j][k];
        const double m = pairwise_mean(column);
        double se = 0.0;
        if (n_seg > 1) {
            double acc = 0.0;
            for (double v : column) acc += (v - m) * (v - m);
            se = std::sqrt(acc / (static_cast<double>(n_seg) *
                                  static_cast<double>(n_seg - 1))) /
                 norm;
        }
        out.tau[k] = k * dt_sample;
        out.value[k] = m / norm;
        out.stderr_[k] = se;
    }
    return out;
}

}  // namespace

CorrelationCurve g1(const std::vector<std::vector<double>>& segments,
                    double dt_sample, int max_lag) {
    return correlation_impl(segments, dt_sample, max_lag, false);
}

CorrelationCurve g2(const std::vector<std::vector<double>>& segments,
                    double dt_sample, int max_lag) {
    return correlation_impl(segments, dt_sample, max_lag, true);
}

Window parse_window(const std::string& name) {
    if (name == "hann") return Window::kHann;
    if (name == "rect") return Window::kRect;
    throw ConfigError("unknown window '" + name + "' (use hann or rect)");
}

Spectrum spectrum(const std::vector<std::vector<double>>& series,
                  double dt_sample, int segment_len, Window window) {
    if (segment_len < 2 || (segment_len & (segment_len - 1)) != 0)
        throw ConfigError("spectrum: segment_len must be a power of two");
    for (const auto& tr : series)
        if (static_cast<int>(tr.size()) < segment_len)
            throw ConfigError("spectrum: segment longer than trace");
    if (series.empty()) throw ConfigError("spectrum: no input series");

    const int len = segment_len;
    std::vector<double> w(len, 1.0);
    if (window == Window::kHann)
        for (int i = 0; i < len; ++i)
            w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / len));
    double w_sq_sum = 0.0;
    for (double v : w) w_sq_sum += v * v;

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> freq(len);
    std::vector<double> buf(len);
    std::vector<double> acc(len, 0.0);
    double mean_weight_acc = 0.0;
    std::size_t n_segments = 0;

    for (const auto& tr : series) {
        const int n = static_cast<int>(tr.size());
        // Welch: 50% overlapping segments
        for (int start = 0; start + len <= n; start += len / 2) {
            double mean = 0.0;
            for (int i = 0; i < len; ++i) mean += tr[start + i];
            mean /= len;
            for (int i = 0; i < len; ++i) buf[i] = (tr[start + i] - mean) * w[i];
            fft.fwd(freq, buf);
            for (int i = 0; i < len; ++i) acc[i] += std::norm(freq[i]);
            mean_weight_acc += mean * mean;
            ++n_segments;
        }
    }

    // two-sided PSD over angular frequency: integral d(omega) = variance
    const double scale =
        dt_sample / (2.0 * std::numbers::pi * w_sq_sum *
                     static_cast<double>(n_segments));

    Spectrum sp;
    sp.segment_len = len;
    sp.window = window == Window::kHann ? "hann" : "rect";
    sp.mean_weight = mean_weight_acc / static_cast<double>(n_segments);
    sp.omega.resize(len);
    sp.density.resize(len);
    const double d_omega = 2.0 * std::numbers::pi / (len * dt_sample);
    // fftshift so the grid is symmetric about omega = 0
    for (int i = 0; i < len; ++i) {
        const int k = i - len / 2;
        const int src = (k + len) % len;
        sp.omega[i] = k * d_omega;
        sp.density[i] = acc[src] * scale;
    }
    return sp;
}

}  // namespace cavsim
