#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "cavsim/integrator.hpp"
#include "cavsim/observables.hpp"
#include "cavsim/summation.hpp"

using namespace cavsim;

namespace {

SystemState make_state(int n, Rng rng, double x_lo, double x_hi, double p_sigma) {
    SystemState s;
    s.x.resize(n);
    s.p.resize(n);
    for (int i = 0; i < n; ++i) s.x[i] = rng.uniform(x_lo, x_hi);
    for (int i = 0; i < n; ++i) s.p[i] = p_sigma * rng.normal();
    s.rng = rng;
    return s;
}

Dynamics make_dynamics(int n, double nbar, double delta_c, double omega_r) {
    Dynamics dyn;
    dyn.n_atoms = n;
    dyn.nbar = nbar;
    dyn.delta_c = delta_c;
    dyn.omega_r = omega_r;
    dyn.friction_g = nbar * 8.0 * omega_r * delta_c / (delta_c * delta_c + 1.0);
    return dyn;
}

}  // namespace

TEST_CASE("free drift: positions advance exactly when Theta = 0") {
    // pairs x, pi - x make Theta vanish identically, so the first kick is 0
    SystemState s;
    s.x.resize(4);
    s.x << 0.4, std::numbers::pi - 0.4, -1.1, std::numbers::pi + 1.1;
    s.p.resize(4);
    s.p << 3.0, -2.0, 0.5, 7.0;
    const Eigen::ArrayXd x0 = s.x;
    const Eigen::ArrayXd p0 = s.p;
    const auto dyn = make_dynamics(4, 2.0, -1.0, 2.57e-3);
    hamiltonian_substep(s, 0.1, dyn);
    for (int i = 0; i < 4; ++i)
        CHECK(s.x[i] ==
              doctest::Approx(x0[i] + 2.0 * 2.57e-3 * p0[i] * 0.1).epsilon(1e-14));
}

TEST_CASE("small oscillation about the well has the mean-field period") {
    // single atom near x = pi: |Theta| ~ 1, omega^2 = 4*omega_r*nbar*|delta_c|
    const double omega_r = 2.57e-3, nbar = 0.5;
    const auto dyn = make_dynamics(1, nbar, -1.0, omega_r);
    SystemState s;
    s.x.resize(1);
    s.x << std::numbers::pi + 0.01;
    s.p = Eigen::ArrayXd::Zero(1);

    const double expected_period =
        2.0 * std::numbers::pi / std::sqrt(4.0 * omega_r * nbar * 1.0);
    const double dt = 0.02;
    std::vector<double> crossings;
    double prev = s.x[0] - std::numbers::pi;
    for (int k = 0; k < static_cast<int>(4.0 * expected_period / dt); ++k) {
        hamiltonian_substep(s, dt, dyn);
        const double cur = s.x[0] - std::numbers::pi;
        if (prev < 0.0 && cur >= 0.0) {
            // linear interpolation of the crossing time
            crossings.push_back(s.t + dt * (k + 1) - dt * cur / (cur - prev));
        }
        prev = cur;
    }
    REQUIRE(crossings.size() >= 3);
    const double period = (crossings.back() - crossings.front()) /
                          static_cast<double>(crossings.size() - 1);
    CHECK(period == doctest::Approx(expected_period).epsilon(0.01));
}

TEST_CASE("velocity Verlet is time-reversible") {
    Rng rng(3);
    auto s = make_state(12, rng, -4.0, 4.0, 10.0);
    const auto dyn = make_dynamics(12, 1.5, -1.0, 2.57e-3);
    const Eigen::ArrayXd x0 = s.x, p0 = s.p;
    for (int k = 0; k < 50; ++k) hamiltonian_substep(s, 0.1, dyn);
    s.p = -s.p;
    for (int k = 0; k < 50; ++k) hamiltonian_substep(s, 0.1, dyn);
    s.p = -s.p;
    CHECK((s.x - x0).abs().maxCoeff() < 1e-12);
    CHECK((s.p - p0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("dissipator: atoms at nodes are untouched") {
    SystemState s;
    s.x = Eigen::ArrayXd::Zero(6);  // sin(0) = 0 exactly
    s.p.resize(6);
    s.p << 1.0, -2.0, 3.0, 0.5, -0.25, 8.0;
    s.rng = Rng(5);
    const Eigen::ArrayXd p0 = s.p;
    const auto dyn = make_dynamics(6, 2.0, -1.0, 0.1);
    for (int k = 0; k < 10; ++k) dissipator_substep(s, 0.05, dyn);
    CHECK((s.p == p0).all());

    // mixed nodes: sin(pi) is O(1e-16), momenta move by at most ~1e-15
    SystemState s2;
    s2.x.resize(4);
    s2.x << 0.0, std::numbers::pi, 2.0 * std::numbers::pi, std::numbers::pi;
    s2.p.resize(4);
    s2.p << 1.0, 2.0, 3.0, 4.0;
    s2.rng = Rng(6);
    const Eigen::ArrayXd p2 = s2.p;
    dissipator_substep(s2, 0.05, dyn);
    CHECK((s2.p - p2).abs().maxCoeff() < 1e-12);
}

TEST_CASE("dissipator: nbar = 0 is an exact identity") {
    Rng rng(8);
    auto s = make_state(10, rng, 0.0, 6.28, 5.0);
    const Eigen::ArrayXd p0 = s.p;
    const auto dyn = make_dynamics(10, 0.0, -1.0, 0.1);
    for (int k = 0; k < 5; ++k) dissipator_substep(s, 0.1, dyn);
    CHECK((s.p == p0).all());
}

TEST_CASE("dissipator noise is rank-1: one shared Wiener increment") {
    const int n = 8;
    Rng rng(21);
    auto base = make_state(n, rng, 0.3, 6.0, 0.0);
    base.p.setZero();
    const auto dyn = make_dynamics(n, 1.0, -1.0, 0.1);
    const Eigen::ArrayXd s_vec = base.x.sin();

    const int reps = 100000;
    Eigen::MatrixXd kicks(reps, n);
    SystemState work = base;
    for (int r = 0; r < reps; ++r) {
        work.x = base.x;
        work.p.setZero();
        dissipator_substep(work, 0.1, dyn);
        kicks.row(r) = work.p.matrix().transpose();
    }
    const Eigen::RowVectorXd mean = kicks.colwise().mean();
    Eigen::MatrixXd centered = kicks.rowwise() - mean;
    const Eigen::MatrixXd cov =
        (centered.adjoint() * centered) / static_cast<double>(reps - 1);

    for (int i = 0; i < n; ++i) {
        CHECK(cov(i, i) > 0.0);
        for (int j = 0; j < n; ++j) {
            const double rho = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
            const double expected = s_vec[i] * s_vec[j] > 0.0 ? 1.0 : -1.0;
            CHECK(rho == doctest::Approx(expected).epsilon(0.01));
        }
    }
    // covariance proportional to s_i s_j
    const double scale = cov(0, 1) / (s_vec[0] * s_vec[1]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(cov(i, j) ==
                  doctest::Approx(scale * s_vec[i] * s_vec[j]).epsilon(0.02));
}

TEST_CASE("fluctuation-dissipation: frozen-position Var(P_s)") {
    // stationary OU variance of P_s must equal S2 * T~ / (2 omega_r N)
    const int n = 16;
    const double omega_r = 0.1, nbar = 2.0;
    const auto dyn = make_dynamics(n, nbar, -1.0, omega_r);  // T~ = 0.5
    Rng rng(31);
    auto s = make_state(n, rng, 0.0, 2.0 * std::numbers::pi, 0.0);
    const double sin_sq = s.x.sin().square().mean();
    const double expected = sin_sq * 0.5 / (2.0 * omega_r * n);

    const double dt = 0.1;
    const int burn = 2000, steps = 3000000, stride = 5;
    for (int k = 0; k < burn; ++k) dissipator_substep(s, dt, dyn);
    double acc = 0.0, acc_sq = 0.0;
    long count = 0;
    for (int k = 0; k < steps; ++k) {
        dissipator_substep(s, dt, dyn);
        if (k % stride == 0) {
            const double ps = collective_sine_momentum(s.x, s.p);
            acc += ps;
            acc_sq += ps * ps;
            ++count;
        }
    }
    const double mean = acc / count;
    const double var = acc_sq / count - mean * mean;
    CHECK(var == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("pure damping is monotone with noise off") {
    const int n = 10;
    const auto dyn = make_dynamics(n, 1.0, -1.0, 0.05);
    Rng rng(41);
    auto s = make_state(n, rng, 0.2, 6.0, 20.0);
    double prev = collective_sine_momentum(s.x, s.p);
    prev = prev * prev;
    for (int k = 0; k < 200; ++k) {
        dissipator_substep(s, 0.1, dyn, /*noise_scale=*/0.0);
        const double ps = collective_sine_momentum(s.x, s.p);
        CHECK(ps * ps <= prev * (1.0 + 1e-12));
        prev = ps * ps;
    }
}

TEST_CASE("nbar = 0: free gas conserves energy to roundoff") {
    Rng rng(51);
    auto s = make_state(32, rng, 0.0, 6.28, 10.0);
    const auto dyn = make_dynamics(32, 0.0, -1.0, 2.57e-3);
    IntegratorConfig icfg;
    icfg.dt = 0.1;
    const double h0 = energy(s.x, s.p, dyn.nbar, dyn.delta_c, dyn.omega_r);
    for (int k = 0; k < 10000; ++k) step(s, dyn, icfg);
    const double h1 = energy(s.x, s.p, dyn.nbar, dyn.delta_c, dyn.omega_r);
    CHECK(std::abs(h1 - h0) <= 1e-10 * std::abs(h0));
}

TEST_CASE("interacting system: shadow energy bounded with dissipation off") {
    Rng rng(53);
    auto s = make_state(50, rng, 0.0, 6.28, std::sqrt(0.5 / (2 * 2.57e-3)));
    const auto dyn = make_dynamics(50, 2.0, -1.0, 2.57e-3);
    IntegratorConfig icfg;
    icfg.dt = 5e-4;
    icfg.dissipator_enabled = false;
    const double h0 = energy(s.x, s.p, dyn.nbar, dyn.delta_c, dyn.omega_r);
    double max_dev = 0.0;
    for (int k = 0; k < 10000; ++k) {
        step(s, dyn, icfg);
        if (k % 50 == 0) {
            const double h = energy(s.x, s.p, dyn.nbar, dyn.delta_c, dyn.omega_r);
            max_dev = std::max(max_dev, std::abs(h - h0));
        }
    }
    CHECK(max_dev <= 1e-8 * std::abs(h0));
}

TEST_CASE("guards reject too-coarse time steps") {
    auto dyn = make_dynamics(10, 4.0, -1.0, 0.25);  // omega_osc = 2
    IntegratorConfig icfg;
    icfg.dt = 0.1;  // omega_osc * dt = 0.2 > 0.1
    CHECK_THROWS_AS(check_guards(dyn, icfg), ConfigError);

    dyn = make_dynamics(10, 50.0, -1.0, 2.57e-3);  // |g| = 0.514
    icfg.dt = 0.3;
    CHECK_THROWS_AS(check_guards(dyn, icfg), ConfigError);

    dyn = make_dynamics(10, 0.05, -1.0, 2.57e-3);
    icfg.dt = 0.1;
    CHECK_NOTHROW(check_guards(dyn, icfg));
}

TEST_CASE("stationary momenta stay Maxwell-Boltzmann below threshold") {
    // start in the stationary state at nbar = 0.1 nbar_c; the marginal must
    // persist: <p^2> = T~/(2 omega_r) within 3% and no non-Gaussian shape
    SimConfig cfg;
    cfg.n_atoms = 50;
    cfg.nbar = 0.05;
    cfg.delta_c = -1.0;
    cfg.omega_r = 2.57e-3;
    cfg.temp_init = 0.5;
    cfg.dt = 0.1;
    const auto dyn = Dynamics::from_config(cfg);
    IntegratorConfig icfg;
    icfg.dt = cfg.dt;

    std::vector<double> momenta;
    for (int traj = 0; traj < 128; ++traj) {
        auto s = initial_ensemble(cfg, Rng::stream(4242, traj));
        for (int k = 0; k < 20000; ++k) step(s, dyn, icfg);
        for (int i = 0; i < cfg.n_atoms; ++i) momenta.push_back(s.p[i]);
    }
    const double expected_var = 0.5 / (2.0 * cfg.omega_r);
    double m2 = 0.0;
    for (double p : momenta) m2 += p * p;
    m2 /= static_cast<double>(momenta.size());
    CHECK(m2 == doctest::Approx(expected_var).epsilon(0.03));
    CHECK(std::abs(excess_kurtosis(momenta)) < 5.0 * std::sqrt(24.0 / momenta.size()));
    CHECK(std::abs(skewness(momenta)) < 5.0 * std::sqrt(6.0 / momenta.size()));
}

TEST_CASE("trajectory sampling: linear schedule") {
    SimConfig cfg;
    cfg.n_atoms = 4;
    cfg.nbar = 0.05;
    cfg.delta_c = -1.0;
    cfg.dt = 0.1;
    cfg.t_end = 1.0;  // 10 steps
    cfg.sample_mode = SampleMode::kLinear;
    cfg.sample_points = 10;

    auto s = initial_ensemble(cfg, Rng::stream(1, 0));
    const auto dyn = Dynamics::from_config(cfg);
    IntegratorConfig icfg;
    icfg.dt = cfg.dt;
    const auto sched = SampleSchedule::from_config(cfg);
    REQUIRE(sched.steps.size() == 10);

    int calls = 0;
    TraceOptions opts;
    opts.observer = [&](const SamplePoint& sp, const SystemState&) {
        ++calls;
        CHECK(sp.t == doctest::Approx(0.1 * calls).epsilon(1e-12));
    };
    const auto trace = integrate_trajectory(s, dyn, icfg, sched, opts);
    CHECK(calls == 10);
    CHECK(trace.size() == 10);
    CHECK_FALSE(trace.failed);
}

TEST_CASE("trajectory sampling: log schedule is geometric to one step") {
    const auto sched = SampleSchedule::logarithmic(0.1, 1000.0, 40);
    REQUIRE(sched.steps.size() >= 2);
    CHECK(sched.steps.front() == 1);
    CHECK(sched.steps.back() == 10000);
    const double ratio = std::pow(1e4, 1.0 / 39.0);
    double ideal = 1.0;
    std::size_t idx = 0;
    for (int j = 0; j < 40; ++j, ideal *= ratio) {
        // every ideal sample time has a realized sample within one step
        while (idx + 1 < sched.steps.size() &&
               std::abs(static_cast<double>(sched.steps[idx + 1]) - ideal) <
                   std::abs(static_cast<double>(sched.steps[idx]) - ideal))
            ++idx;
        CHECK(std::abs(static_cast<double>(sched.steps[idx]) - ideal) <= 1.0);
    }
    for (std::size_t k = 1; k < sched.steps.size(); ++k)
        CHECK(sched.steps[k] > sched.steps[k - 1]);
}

TEST_CASE("same seed gives bit-identical traces") {
    SimConfig cfg;
    cfg.n_atoms = 12;
    cfg.nbar = 0.3;
    cfg.delta_c = -1.5;
    cfg.t_end = 50.0;
    cfg.sample_points = 17;
    const auto dyn = Dynamics::from_config(cfg);
    IntegratorConfig icfg;
    const auto sched = SampleSchedule::from_config(cfg);

    auto s1 = initial_ensemble(cfg, Rng::stream(777, 3));
    auto s2 = initial_ensemble(cfg, Rng::stream(777, 3));
    const auto t1 = integrate_trajectory(s1, dyn, icfg, sched);
    const auto t2 = integrate_trajectory(s2, dyn, icfg, sched);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t k = 0; k < t1.size(); ++k) {
        CHECK(t1.theta[k] == t2.theta[k]);
        CHECK(t1.ps[k] == t2.ps[k]);
        CHECK(t1.ekin[k] == t2.ekin[k]);
    }
    CHECK((s1.x == s2.x).all());
    CHECK(s1.rng == s2.rng);
}

TEST_CASE("NaN input flags the trace as failed") {
    SimConfig cfg;
    cfg.n_atoms = 4;
    cfg.nbar = 0.1;
    cfg.delta_c = -1.0;
    cfg.t_end = 10.0;
    auto s = initial_ensemble(cfg, Rng::stream(1, 1));
    s.p[2] = std::numeric_limits<double>::quiet_NaN();
    const auto dyn = Dynamics::from_config(cfg);
    IntegratorConfig icfg;
    const auto trace = integrate_trajectory(s, dyn, icfg,
                                            SampleSchedule::from_config(cfg));
    CHECK(trace.failed);

    SystemState s2 = initial_ensemble(cfg, Rng::stream(1, 2));
    s2.x[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step(s2, dyn, icfg), NumericError);
}

TEST_CASE("Strang scheme: weak convergence on <Theta^2> is at least first order") {
    // strong coupling and coarse steps make the dt-bias visible above the
    // Monte Carlo error; the reference is dt/8
    SimConfig base;
    base.n_atoms = 8;
    base.nbar = 4.0;
    base.delta_c = -1.0;
    base.omega_r = 0.25;
    base.temp_init = 0.5;

    const double t_end = 8.0;
    const int n_traj = 60000;
    const auto dyn = Dynamics::from_config(base);

    auto mean_theta_sq = [&](double dt, Scheme scheme) {
        IntegratorConfig icfg;
        icfg.dt = dt;
        icfg.scheme = scheme;
        icfg.guard_friction = 0.9;
        icfg.guard_frequency = 0.9;
        const auto steps = static_cast<int>(std::llround(t_end / dt));
        std::vector<double> vals(n_traj);
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        auto work = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n_traj) return;
                auto s = initial_ensemble(base, Rng::stream(2024, i));
                for (int k = 0; k < steps; ++k) step(s, dyn, icfg);
                const double th = order_parameter(s.x);
                vals[i] = th * th;
            }
        };
        for (int w = 0; w < 2; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
        const double m = pairwise_mean(vals);
        double var = 0.0;
        for (double v : vals) var += (v - m) * (v - m);
        var /= static_cast<double>(n_traj) * (n_traj - 1);
        return std::pair<double, double>{m, std::sqrt(var)};
    };

    const auto ref = mean_theta_sq(0.025, Scheme::kStrangOu);
    const auto coarse = mean_theta_sq(0.2, Scheme::kStrangOu);
    const auto fine = mean_theta_sq(0.1, Scheme::kStrangOu);

    const double b_coarse = std::abs(coarse.first - ref.first);
    const double b_fine = std::abs(fine.first - ref.first);
    const double noise = 3.0 * std::sqrt(coarse.second * coarse.second +
                                         ref.second * ref.second);
    INFO("bias(0.2) = " << b_coarse << ", bias(0.1) = " << b_fine
                        << ", 3 sigma = " << noise);
    REQUIRE(b_coarse > 2.0 * noise);  // bias must be resolved
    // halving dt at least halves the bias (allow statistical slack)
    CHECK(b_fine <= 0.6 * b_coarse + noise);

    // Euler-Maruyama cross-check: both schemes agree at small dt
    const auto em = mean_theta_sq(0.025, Scheme::kEulerMaruyama);
    const double z = std::abs(em.first - ref.first) /
                     std::sqrt(em.second * em.second + ref.second * ref.second);
    CHECK(z < 4.0);
}
