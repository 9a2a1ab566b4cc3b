#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cavsim/rng.hpp"
#include "cavsim/spectral.hpp"

using namespace cavsim;

namespace {

std::vector<double> cosine_series(double omega, double dt, int len) {
    std::vector<double> v(len);
    for (int k = 0; k < len; ++k) v[k] = std::cos(omega * k * dt);
    return v;
}

std::vector<double> gaussian_series(Rng& rng, int len, double sigma) {
    std::vector<double> v(len);
    for (auto& x : v) x = sigma * rng.normal();
    return v;
}

/// Exact discrete OU: x_{k+1} = a x_k + sqrt((1-a^2) var) xi.
std::vector<double> ou_series(Rng& rng, int len, double tau, double dt,
                              double var) {
    std::vector<double> v(len);
    const double a = std::exp(-dt / tau);
    double x = std::sqrt(var) * rng.normal();
    for (int k = 0; k < len; ++k) {
        v[k] = x;
        x = a * x + std::sqrt((1.0 - a * a) * var) * rng.normal();
    }
    return v;
}

}  // namespace

TEST_CASE("g1: constant signal") {
    std::vector<std::vector<double>> segs{std::vector<double>(500, 0.37)};
    const auto c = g1(segs, 0.5, 60);
    for (double v : c.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.tau.front() == 0.0);
    CHECK(c.tau[1] == doctest::Approx(0.5));
}

TEST_CASE("g1: pure tone oscillates with amplitude pi^2/8") {
    // <Theta^2>/<|Theta|>^2 = (1/2)/(2/pi)^2 for a cosine
    const double omega = 0.3, dt = 0.5;
    // ~1000 periods so the partial-period bias is negligible
    const int len = 41889;
    std::vector<std::vector<double>> segs{cosine_series(omega, dt, len)};
    const auto c = g1(segs, dt, 400);
    const double amp = std::numbers::pi * std::numbers::pi / 8.0;
    for (int k : {0, 50, 100, 200, 399}) {
        CHECK(c.value[k] ==
              doctest::Approx(amp * std::cos(omega * c.tau[k])).epsilon(0.01));
    }
}

TEST_CASE("g1: white noise decorrelates immediately") {
    Rng rng(11);
    std::vector<std::vector<double>> segs;
    for (int j = 0; j < 20; ++j) segs.push_back(gaussian_series(rng, 20000, 1.3));
    const auto c = g1(segs, 1.0, 50);
    // g1(0) = <Theta^2>/<|Theta|>^2 = pi/2 for a centered Gaussian
    CHECK(c.value[0] == doctest::Approx(std::numbers::pi / 2.0).epsilon(0.02));
    for (int k = 1; k <= 50; ++k) CHECK(std::abs(c.value[k]) < 0.02);
}

TEST_CASE("g2: Gaussian gives 3, locked amplitude gives 1") {
    Rng rng(13);
    std::vector<std::vector<double>> segs;
    for (int j = 0; j < 30; ++j) segs.push_back(gaussian_series(rng, 40000, 0.4));
    const auto c = g2(segs, 1.0, 10);
    CHECK(c.value[0] == doctest::Approx(3.0).epsilon(0.03));

    // constant |Theta| (telegraph between +-c): intensity never fluctuates
    std::vector<double> telegraph(5000);
    Rng flip(17);
    double sign = 1.0;
    for (auto& v : telegraph) {
        if (flip.uniform01() < 0.1) sign = -sign;
        v = 0.82 * sign;
    }
    const auto ct = g2({telegraph}, 1.0, 100);
    for (double v : ct.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("g2 lag zero equals the direct moment ratio") {
    Rng rng(19);
    std::vector<std::vector<double>> segs;
    for (int j = 0; j < 5; ++j) segs.push_back(ou_series(rng, 3000, 20.0, 1.0, 0.5));
    const auto c = g2(segs, 1.0, 40);
    double m2 = 0.0, m4 = 0.0;
    std::size_t n = 0;
    for (const auto& s : segs)
        for (double v : s) {
            m2 += v * v;
            m4 += v * v * v * v;
            ++n;
        }
    m2 /= n;
    m4 /= n;
    CHECK(c.value[0] == doctest::Approx(m4 / (m2 * m2)).epsilon(1e-12));
}

TEST_CASE("g2 of a mixing process relaxes to 1") {
    Rng rng(23);
    std::vector<std::vector<double>> segs;
    for (int j = 0; j < 40; ++j) segs.push_back(ou_series(rng, 20000, 10.0, 1.0, 1.0));
    const auto c = g2(segs, 1.0, 100);
    CHECK(c.value[0] == doctest::Approx(3.0).epsilon(0.05));
    for (int k = 80; k <= 100; ++k)
        CHECK(c.value[k] == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("correlation input validation") {
    std::vector<std::vector<double>> segs{std::vector<double>(100, 1.0)};
    CHECK_THROWS_AS(g1(segs, 1.0, 100), ConfigError);  // lag >= length
    CHECK_THROWS_AS(g1({}, 1.0, 10), ConfigError);
}

TEST_CASE("spectrum: tone peaks at +-omega0 within one bin") {
    const double omega = 0.3, dt = 0.5;
    std::vector<std::vector<double>> series{cosine_series(omega, dt, 20000)};
    const auto sp = spectrum(series, dt, 4096, Window::kHann);
    REQUIRE(sp.omega.size() == 4096);
    const double d_omega = 2.0 * std::numbers::pi / (4096 * dt);

    // locate the maxima on each side
    double best_pos = 0.0, best_neg = 0.0, max_pos = -1.0, max_neg = -1.0;
    for (std::size_t k = 0; k < sp.omega.size(); ++k) {
        if (sp.omega[k] > 0 && sp.density[k] > max_pos) {
            max_pos = sp.density[k];
            best_pos = sp.omega[k];
        }
        if (sp.omega[k] < 0 && sp.density[k] > max_neg) {
            max_neg = sp.density[k];
            best_neg = sp.omega[k];
        }
    }
    CHECK(std::abs(best_pos - omega) <= d_omega);
    CHECK(std::abs(best_neg + omega) <= d_omega);
    // symmetric grid including 0
    CHECK(sp.omega[2048] == doctest::Approx(0.0));
}

TEST_CASE("spectrum: white noise is flat") {
    Rng rng(29);
    std::vector<std::vector<double>> series;
    for (int j = 0; j < 30; ++j) series.push_back(gaussian_series(rng, 16384, 1.0));
    const auto sp = spectrum(series, 1.0, 512, Window::kHann);
    double mean = 0.0;
    for (double v : sp.density) mean += v;
    mean /= static_cast<double>(sp.density.size());
    for (double v : sp.density)
        CHECK(v == doctest::Approx(mean).epsilon(0.25));
}

TEST_CASE("spectrum: Parseval with rectangular window") {
    Rng rng(31);
    std::vector<std::vector<double>> series;
    for (int j = 0; j < 4; ++j) series.push_back(ou_series(rng, 4096, 5.0, 1.0, 2.0));
    const int len = 1024;
    const auto sp = spectrum(series, 1.0, len, Window::kRect);

    const double d_omega = sp.omega[1] - sp.omega[0];
    double integral = 0.0;
    for (double v : sp.density) integral += v * d_omega;

    // variance of the mean-removed signal, averaged over the same segments
    double var = 0.0;
    std::size_t n_seg = 0;
    for (const auto& tr : series) {
        for (int start = 0; start + len <= static_cast<int>(tr.size());
             start += len / 2) {
            double mean = 0.0;
            for (int i = 0; i < len; ++i) mean += tr[start + i];
            mean /= len;
            double acc = 0.0;
            for (int i = 0; i < len; ++i)
                acc += (tr[start + i] - mean) * (tr[start + i] - mean);
            var += acc / len;
            ++n_seg;
        }
    }
    var /= static_cast<double>(n_seg);
    CHECK(integral == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("spectrum input validation") {
    std::vector<std::vector<double>> series{std::vector<double>(100, 0.0)};
    CHECK_THROWS_AS(spectrum(series, 1.0, 1000, Window::kHann), ConfigError);
    CHECK_THROWS_AS(spectrum(series, 1.0, 256, Window::kHann), ConfigError);
    CHECK_THROWS_AS(parse_window("blackman"), ConfigError);
    CHECK(parse_window("hann") == Window::kHann);
}

TEST_CASE("estimators are invariant under trace duplication") {
    Rng rng(37);
    std::vector<std::vector<double>> series;
    for (int j = 0; j < 3; ++j) series.push_back(ou_series(rng, 4096, 8.0, 1.0, 1.0));
    auto doubled = series;
    doubled.insert(doubled.end(), series.begin(), series.end());

    const auto c1a = g2(series, 1.0, 20);
    const auto c1b = g2(doubled, 1.0, 20);
    for (std::size_t k = 0; k < c1a.value.size(); ++k)
        CHECK(c1a.value[k] == doctest::Approx(c1b.value[k]).epsilon(1e-14));

    const auto spa = spectrum(series, 1.0, 512, Window::kHann);
    const auto spb = spectrum(doubled, 1.0, 512, Window::kHann);
    for (std::size_t k = 0; k < spa.density.size(); ++k)
        CHECK(spa.density[k] == doctest::Approx(spb.density[k]).epsilon(1e-12));
}
