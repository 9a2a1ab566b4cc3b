#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavsim/rates.hpp"
#include "cavsim/rng.hpp"

namespace cavsim {

/// Metropolis sampler of the stationary distribution f ~ exp(-beta H).
/// Momenta separate exactly (Gaussian) and are never part of the chain;
/// only positions are sampled, with the grating potential
/// V~ = delta_c * nbar * N * Theta^2 at inverse temperature beta~.
struct McmcConfig {
    int n_atoms = 0;
    double nbar = 0.0;
    double delta_c = -1.0;
    double omega_r = 2.57e-3;
    double proposal_width = 1.0;   ///< in (0, pi]; auto-tuned during burn-in
    int n_sweeps = 20000;
    int burn_in = 5000;
    int thinning = 5;              ///< record every `thinning` sweeps
    std::uint64_t seed = 1;
    double global_flip_rate = 0.1; ///< per-sweep chance of the x -> x+pi move
    int n_chains = 4;

    void validate() const;
};

struct EquilibriumSamples {
    std::vector<double> theta;            ///< thinned Theta samples, all chains
    std::vector<int> chain_of_sample;     ///< chain index per sample
    double acceptance_rate = 0.0;         ///< post burn-in, site moves only
    double tuned_width = 0.0;
    int n_chains = 0;
    // parameters the samples were drawn at (compare() refuses mismatches)
    int n_atoms = 0;
    double nbar = 0.0;
    double delta_c = 0.0;
};

/// Run independent chains (one RNG stream each) and pool thinned samples.
EquilibriumSamples sample_equilibrium(const McmcConfig& cfg);

/// Draw an exact thermal momentum sample, Var = temp/(2*omega_r).
std::vector<double> sample_equilibrium_momenta(const McmcConfig& cfg, int count,
                                               Rng& rng);

/// Metropolis acceptance probability for a potential change dV at beta~.
inline double acceptance_probability(double beta_dV) {
    return beta_dV <= 0.0 ? 1.0 : std::exp(-beta_dV);
}

struct OracleMoments {
    double theta_sq = 0.0, theta_sq_err = 0.0;
    double theta_abs = 0.0, theta_abs_err = 0.0;
    double theta_4 = 0.0, theta_4_err = 0.0;
    double g2_0 = 0.0, g2_0_err = 0.0;  ///< <Theta^4>/<Theta^2>^2
    double chi = 0.0, chi_err = 0.0;
    std::size_t n_samples = 0;
};

/// Moments with jackknife errors (delete-one over ~50 blocks).
OracleMoments oracle_moments(const std::vector<double>& theta_samples);

struct CompareReport {
    double z_theta_sq = 0.0;
    double z_theta_abs = 0.0;
    double z_g2_0 = 0.0;
    double ks_distance = 0.0;  ///< two-sample KS on symmetrized Theta
    double ks_bound = 0.0;
    bool pass = false;
    std::string to_string() const;
};

/// Parameters an SDE ensemble was generated at; compare() refuses to run
/// against an oracle drawn at different ones.
struct SdeEnsembleInfo {
    int n_atoms = 0;
    double nbar = 0.0;
    double delta_c = 0.0;
};

/// Moment z-scores plus a two-sample distance between the SDE long-time
/// ensemble and the equilibrium oracle. PASS iff all |z| < 3 and the
/// histogram distance is below `ks_bound`. Because the target density is
/// even in Theta, both sample sets are symmetrized before the distance so a
/// finite trajectory count's uneven well split does not register as a
/// distribution difference.
CompareReport compare(const std::vector<double>& sde_theta,
                      const OracleMoments& sde_moments,
                      const SdeEnsembleInfo& sde_info,
                      const EquilibriumSamples& oracle,
                      double ks_bound = 0.08);

/// Convenience for jackknife moment errors over per-trajectory groups.
OracleMoments grouped_moments(const std::vector<std::vector<double>>& groups);

}  // namespace cavsim
