#include "cavsim/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cavsim/errors.hpp"
#include "cavsim/summation.hpp"

namespace cavsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0.0 ? x + kTwoPi : x;
}

struct Chain {
    std::vector<double> x;      // wrapped positions
    std::vector<double> cos_x;
    double theta_sum = 0.0;     // sum of cos(x), refreshed every sweep
    double beta = 0.0;          // beta~ = beta * hbar * kappa
    double pot_coef = 0.0;      // delta_c * nbar * N
    Rng rng;

    double theta() const { return theta_sum / static_cast<double>(x.size()); }

    double potential(double th) const { return pot_coef * th * th; }

    /// One sweep = N single-site proposals; returns accepted count.
    int sweep(double width) {
        const int n = static_cast<int>(x.size());
        int accepted = 0;
        for (int k = 0; k < n; ++k) {
            const int i = static_cast<int>(rng.next_u64() % n);
            const double x_new = wrap_2pi(x[i] + width * rng.uniform(-1.0, 1.0));
            const double c_new = std::cos(x_new);
            const double th_old = theta_sum / n;
            const double th_new = (theta_sum - cos_x[i] + c_new) / n;
            const double dV = potential(th_new) - potential(th_old);
            if (acceptance_probability(beta * dV) >= rng.uniform01()) {
                x[i] = x_new;
                theta_sum += c_new - cos_x[i];
                cos_x[i] = c_new;
                ++accepted;
            }
        }
        // refresh the running sums so rounding never accumulates
        theta_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            cos_x[i] = std::cos(x[i]);
            theta_sum += cos_x[i];
        }
        return accepted;
    }

    /// x -> x + pi maps Theta -> -Theta; V is even in Theta so dV = 0 and
    /// the move is always accepted. Keeps the chain ergodic across the two
    /// symmetric wells at large nbar.
    void global_flip() {
        for (auto& xi : x) xi = wrap_2pi(xi + std::numbers::pi);
        theta_sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            cos_x[i] = std::cos(x[i]);
            theta_sum += cos_x[i];
        }
    }
};

}  // namespace

void McmcConfig::validate() const {
    if (n_atoms < 1) throw ConfigError("mcmc: n_atoms must be >= 1");
    if (!(nbar >= 0.0)) throw ConfigError("mcmc: nbar must be >= 0");
    if (!(delta_c < 0.0)) throw ConfigError("mcmc: delta_c must be < 0");
    if (!(proposal_width > 0.0 && proposal_width <= std::numbers::pi))
        throw ConfigError("mcmc: proposal_width must lie in (0, pi]");
    if (burn_in >= n_sweeps)
        throw ConfigError("mcmc: burn_in must be < n_sweeps");
    if (thinning < 1) throw ConfigError("mcmc: thinning must be >= 1");
    if (n_chains < 1) throw ConfigError("mcmc: n_chains must be >= 1");
    if (!(global_flip_rate >= 0.0 && global_flip_rate <= 1.0))
        throw ConfigError("mcmc: global_flip_rate must lie in [0, 1]");
}

EquilibriumSamples sample_equilibrium(const McmcConfig& cfg) {
    cfg.validate();
    const DerivedRates rates =
        derive_rates(cfg.nbar, cfg.delta_c, cfg.omega_r, cfg.n_atoms);

    EquilibriumSamples out;
    out.n_chains = cfg.n_chains;
    out.n_atoms = cfg.n_atoms;
    out.nbar = cfg.nbar;
    out.delta_c = cfg.delta_c;

    double width_sum = 0.0;
    std::size_t accepted_total = 0, attempted_total = 0;

    for (int chain_idx = 0; chain_idx < cfg.n_chains; ++chain_idx) {
        Chain ch;
        ch.rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(chain_idx));
        ch.beta = rates.beta_hbar_kappa;
        ch.pot_coef = cfg.delta_c * cfg.nbar * cfg.n_atoms;
        ch.x.resize(cfg.n_atoms);
        ch.cos_x.resize(cfg.n_atoms);
        for (auto& xi : ch.x) xi = ch.rng.uniform(0.0, kTwoPi);
        ch.theta_sum = 0.0;
        for (int i = 0; i < cfg.n_atoms; ++i) {
            ch.cos_x[i] = std::cos(ch.x[i]);
            ch.theta_sum += ch.cos_x[i];
        }

        // burn-in with width tuning toward the 30-50% acceptance band
        double width = cfg.proposal_width;
        int window_acc = 0, window_att = 0;
        for (int s = 0; s < cfg.burn_in; ++s) {
            window_acc += ch.sweep(width);
            window_att += cfg.n_atoms;
            if (ch.rng.uniform01() < cfg.global_flip_rate) ch.global_flip();
            if ((s + 1) % 50 == 0) {
                const double rate = static_cast<double>(window_acc) / window_att;
                if (rate < 0.30) width *= 0.8;
                else if (rate > 0.50) width *= 1.25;
                width = std::clamp(width, 1e-3, std::numbers::pi);
                window_acc = window_att = 0;
            }
        }
        width_sum += width;

        for (int s = cfg.burn_in; s < cfg.n_sweeps; ++s) {
            accepted_total += ch.sweep(width);
            attempted_total += cfg.n_atoms;
            if (ch.rng.uniform01() < cfg.global_flip_rate) ch.global_flip();
            if ((s - cfg.burn_in) % cfg.thinning == 0) {
                out.theta.push_back(ch.theta());
                out.chain_of_sample.push_back(chain_idx);
            }
        }
    }

    out.tuned_width = width_sum / cfg.n_chains;
    out.acceptance_rate = attempted_total
                              ? static_cast<double>(accepted_total) / attempted_total
                              : 0.0;
    return out;
}

std::vector<double> sample_equilibrium_momenta(const McmcConfig& cfg, int count,
                                               Rng& rng) {
    const DerivedRates rates =
        derive_rates(cfg.nbar, cfg.delta_c, cfg.omega_r, cfg.n_atoms);
    const double sigma = std::sqrt(rates.momentum_var_eq);
    std::vector<double> p(count);
    for (auto& v : p) v = sigma * rng.normal();
    return p;
}

namespace {

struct PooledMoments {
    double t2, tabs, t4;
};

PooledMoments pool_moments(const std::vector<const std::vector<double>*>& blocks) {
    std::vector<double> sq, ab, q4;
    for (const auto* b : blocks)
        for (double v : *b) {
            sq.push_back(v * v);
            ab.push_back(std::abs(v));
            q4.push_back(v * v * v * v);
        }
    return {pairwise_mean(sq), pairwise_mean(ab), pairwise_mean(q4)};
}

OracleMoments jackknife_moments(const std::vector<std::vector<double>>& blocks) {
    std::vector<const std::vector<double>*> all;
    all.reserve(blocks.size());
    for (const auto& b : blocks) all.push_back(&b);

    const auto full = pool_moments(all);
    OracleMoments m;
    m.theta_sq = full.t2;
    m.theta_abs = full.tabs;
    m.theta_4 = full.t4;
    m.g2_0 = full.t4 / (full.t2 * full.t2);
    m.chi = full.t2 - full.tabs * full.tabs;
    for (const auto& b : blocks) m.n_samples += b.size();

    const std::size_t nb = blocks.size();
    if (nb < 2) return m;

    std::vector<double> j_t2(nb), j_tabs(nb), j_g2(nb), j_t4(nb), j_chi(nb);
    for (std::size_t d = 0; d < nb; ++d) {
        std::vector<const std::vector<double>*> rest;
        rest.reserve(nb - 1);
        for (std::size_t j = 0; j < nb; ++j)
            if (j != d) rest.push_back(&blocks[j]);
        const auto pm = pool_moments(rest);
        j_t2[d] = pm.t2;
        j_tabs[d] = pm.tabs;
        j_t4[d] = pm.t4;
        j_g2[d] = pm.t4 / (pm.t2 * pm.t2);
        j_chi[d] = pm.t2 - pm.tabs * pm.tabs;
    }
    auto jk_err = [nb](const std::vector<double>& j) {
        const double mean = pairwise_mean(j);
        double acc = 0.0;
        for (double v : j) acc += (v - mean) * (v - mean);
        return std::sqrt(acc * static_cast<double>(nb - 1) /
                         static_cast<double>(nb));
    };
    m.theta_sq_err = jk_err(j_t2);
    m.theta_abs_err = jk_err(j_tabs);
    m.theta_4_err = jk_err(j_t4);
    m.g2_0_err = jk_err(j_g2);
    m.chi_err = jk_err(j_chi);
    return m;
}

}  // namespace

OracleMoments oracle_moments(const std::vector<double>& theta_samples) {
    if (theta_samples.size() < 100)
        throw ConfigError("oracle_moments: need >= 100 decorrelated samples");
    // delete-one jackknife over ~50 contiguous blocks
    const std::size_t nb = std::min<std::size_t>(50, theta_samples.size());
    std::vector<std::vector<double>> blocks(nb);
    const std::size_t n = theta_samples.size();
    for (std::size_t i = 0; i < n; ++i)
        blocks[i * nb / n].push_back(theta_samples[i]);
    return jackknife_moments(blocks);
}

OracleMoments grouped_moments(const std::vector<std::vector<double>>& groups) {
    if (groups.empty()) throw ConfigError("grouped_moments: empty input");
    return jackknife_moments(groups);
}

namespace {

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double v = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= v) ++ia;
        while (ib < b.size() && b[ib] <= v) ++ib;
        d = std::max(d, std::abs(ia / na - ib / nb));
    }
    return d;
}

}  // namespace

std::string CompareReport::to_string() const {
    std::ostringstream os;
    os << "z(<Theta^2>) = " << z_theta_sq << ", z(<|Theta|>) = " << z_theta_abs
       << ", z(g2_0) = " << z_g2_0 << ", KS = " << ks_distance << " (bound "
       << ks_bound << ") -> " << (pass ? "PASS" : "FAIL");
    return os.str();
}

CompareReport compare(const std::vector<double>& sde_theta,
                      const OracleMoments& sde_moments,
                      const SdeEnsembleInfo& sde_info,
                      const EquilibriumSamples& oracle, double ks_bound) {
    if (sde_info.n_atoms != oracle.n_atoms || sde_info.nbar != oracle.nbar ||
        sde_info.delta_c != oracle.delta_c)
        throw ConfigError(
            "compare: ensembles were generated at different (N, nbar, "
            "delta_c); refusing to compare");

    const OracleMoments om = oracle_moments(oracle.theta);

    auto z = [](double a, double ea, double b, double eb) {
        return (a - b) / std::sqrt(ea * ea + eb * eb);
    };
    CompareReport rep;
    rep.z_theta_sq = z(sde_moments.theta_sq, sde_moments.theta_sq_err,
                       om.theta_sq, om.theta_sq_err);
    rep.z_theta_abs = z(sde_moments.theta_abs, sde_moments.theta_abs_err,
                        om.theta_abs, om.theta_abs_err);
    rep.z_g2_0 = z(sde_moments.g2_0, sde_moments.g2_0_err, om.g2_0, om.g2_0_err);

    // symmetrize: the target density is even in Theta
    std::vector<double> a;
    a.reserve(2 * sde_theta.size());
    for (double v : sde_theta) {
        a.push_back(v);
        a.push_back(-v);
    }
    std::vector<double> b;
    b.reserve(2 * oracle.theta.size());
    for (double v : oracle.theta) {
        b.push_back(v);
        b.push_back(-v);
    }
    rep.ks_distance = ks_statistic(std::move(a), std::move(b));
    rep.ks_bound = ks_bound;
    rep.pass = std::abs(rep.z_theta_sq) < 3.0 &&
               std::abs(rep.z_theta_abs) < 3.0 && std::abs(rep.z_g2_0) < 3.0 &&
               rep.ks_distance < ks_bound;
    return rep;
}

}  // namespace cavsim
