#pragma once

#include "cachedrl/prior.hpp"

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cachedrl {

// Everything the divergence bound consumes for one state.
struct BoundInputs {
  double kappa = 0.0;    // sup-norm log-prior error
  double epsilon = 0.0;  // sup-norm Q error
  double tau = 1.0;      // inference temperature
  double rho = 0.0;      // visitation weight mu(s) / E[mu]
};

// Sup-norm distance between log-priors, with both distributions floored at
// 1e-12 and renormalized so the result is finite on degenerate supports.
double prior_error(const PriorDistribution& cached, const PriorDistribution& fresh);

// Sup-norm distance between two Q vectors over the same action set.
double q_error(const std::map<std::string, double>& q, const std::map<std::string, double>& q_star);

// x / (1 - exp(-x)) * (1 + rho) with x = kappa + epsilon/tau; continuous
// limit 1 + rho as x -> 0.
double theorem1_bound(const BoundInputs& b);

// KL between the cached and exact posteriors (floored).
double measured_kl(const PriorDistribution& cached_posterior,
                   const PriorDistribution& exact_posterior);

struct BoundSample {
  double noise_level = 0.0;
  std::string state_id;
  double kappa = 0.0;
  double epsilon = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double kl = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct BoundReport {
  std::vector<BoundSample> rows;
  int violations = 0;
  std::map<double, double> mean_kl_by_level;

  std::string to_csv() const;
};

// Adds Gaussian noise to the log-probabilities and renormalizes.
PriorDistribution perturb_log_prior(const PriorDistribution& prior, double sigma,
                                    std::mt19937_64& rng);

struct BoundExperimentInputs {
  std::map<std::string, std::int64_t> visit_counts;  // empirical, visited states only
  std::function<PriorDistribution(const std::string&)> fresh_prior;
  std::function<std::map<std::string, double>(const std::string&)> learned_q;
  std::function<std::map<std::string, double>(const std::string&)> oracle_q;
  double tau = 0.3;
  std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.4};
  int samples_per_level = 500;
};

// Samples visited states by visitation weight per noise level, perturbs the
// cached prior, and checks measured KL against the theoretical bound.
BoundReport bound_experiment(const BoundExperimentInputs& in, std::mt19937_64& rng);

// Fits beta as the median of successive ratios of per-window weighted prior
// errors; passes when beta < 1. Requires at least 3 windows.
struct DecayCheck {
  double beta_hat = 0.0;
  bool pass = false;
};
DecayCheck corollary_decay_check(const std::vector<double>& window_errors);

}  // namespace cachedrl
