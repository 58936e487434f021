#pragma once

#include "cachedrl/cache.hpp"
#include "cachedrl/embedding.hpp"
#include "cachedrl/prior.hpp"
#include "cachedrl/provider.hpp"

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cachedrl {

// tau(h) = max(floor, base * exp(-decay * h)).
struct TemperatureSchedule {
  double base = 0.8;
  double decay = 2.0;
  double floor = 0.1;
};

double temperature(double hit_rate, const TemperatureSchedule& sched);

// Sliding-window cache hit rate driving the temperature schedule.
class HitRateWindow {
 public:
  explicit HitRateWindow(std::size_t capacity = 500) : capacity_(capacity) {}

  void record(bool hit);
  double rate() const;

 private:
  std::size_t capacity_;
  std::deque<bool> window_;
};

// posterior(a) proportional to prior(a) * exp(q(a) / tau), normalized with
// max-subtraction. Throws if q is missing or non-finite on the prior support,
// or if every weight is zero.
PriorDistribution posterior_weights(const PriorDistribution& prior,
                                    const std::map<std::string, double>& q, double tau);

// Closed-form maximizer of E_pi[q] - alpha * KL(pi || prior); identical to
// posterior_weights at tau = alpha.
PriorDistribution kl_regularized_policy(const PriorDistribution& prior,
                                        const std::map<std::string, double>& q, double alpha);

std::string sample_categorical(const PriorDistribution& dist, std::mt19937_64& rng);

// Distinct candidates drawn from the prior without replacement; the full
// support when it has at most k actions.
std::vector<std::string> sample_candidates(const PriorDistribution& prior, int k,
                                           std::mt19937_64& rng);

struct SelectOptions {
  int candidates = 5;
  bool use_cache = true;             // false: query the provider every step
  bool uniform_prior = false;        // no-prior ablation; no provider involved
  std::optional<double> fixed_tau;   // pins the temperature when set
};

struct ActionTrace {
  PriorDistribution prior_used;
  bool cache_hit = false;
  double similarity = 0.0;
  double tau = 0.0;
  std::vector<std::string> candidates;
  std::vector<double> weights;
  std::string chosen;
};

// Two-stage selection: cache-or-query the prior, sample candidates, reweight
// by Q under the adaptive temperature, sample one action.
ActionTrace select_action(const std::string& description, const std::string& state_id,
                          const std::map<std::string, double>& q_values, SemanticCache& cache,
                          PriorProvider& provider, const EmbeddingConfig& embed_cfg,
                          const TemperatureSchedule& sched, HitRateWindow& window,
                          const SelectOptions& opts, Step now, std::mt19937_64& rng);

}  // namespace cachedrl
