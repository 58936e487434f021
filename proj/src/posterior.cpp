#include "cachedrl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachedrl {

double temperature(double hit_rate, const TemperatureSchedule& sched) {
  if (!(hit_rate >= 0.0 && hit_rate <= 1.0)) {
    throw std::invalid_argument("hit rate out of [0,1]");
  }
  return std::max(sched.floor, sched.base * std::exp(-sched.decay * hit_rate));
}

void HitRateWindow::record(bool hit) {
  window_.push_back(hit);
  while (window_.size() > capacity_) window_.pop_front();
}

double HitRateWindow::rate() const {
  if (window_.empty()) return 0.0;
  double hits = 0.0;
  for (bool h : window_) hits += h ? 1.0 : 0.0;
  return hits / static_cast<double>(window_.size());
}

PriorDistribution posterior_weights(const PriorDistribution& prior,
                                    const std::map<std::string, double>& q, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
  double q_max = -std::numeric_limits<double>::infinity();
  for (const auto& [a, p] : prior.probs()) {
    auto it = q.find(a);
    if (it == q.end() || !std::isfinite(it->second)) {
      throw std::invalid_argument("missing or non-finite Q value for action " + a);
    }
    if (p > 0.0) q_max = std::max(q_max, it->second);
  }
  std::map<std::string, double> weights;
  for (const auto& [a, p] : prior.probs()) {
    weights[a] = p * std::exp((q.at(a) - q_max) / tau);
  }
  return PriorDistribution::normalized(weights);
}

PriorDistribution kl_regularized_policy(const PriorDistribution& prior,
                                        const std::map<std::string, double>& q, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return posterior_weights(prior, q, alpha);
}

std::string sample_categorical(const PriorDistribution& dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double cum = 0.0;
  const auto& probs = dist.probs();
  for (const auto& [a, p] : probs) {
    cum += p;
    if (u < cum) return a;
  }
  return probs.rbegin()->first;
}

std::vector<std::string> sample_candidates(const PriorDistribution& prior, int k,
                                           std::mt19937_64& rng) {
  if (k < 1) throw std::invalid_argument("candidate count must be at least 1");
  if (static_cast<std::size_t>(k) >= prior.support_size()) {
    std::vector<std::string> all;
    for (const auto& [a, p] : prior.probs()) all.push_back(a);
    return all;
  }
  std::map<std::string, double> remaining;
  for (const auto& [a, p] : prior.probs()) {
    if (p > 0.0) remaining[a] = p;
  }
  if (static_cast<std::size_t>(k) >= remaining.size()) {
    std::vector<std::string> positive;
    for (const auto& [a, p] : remaining) positive.push_back(a);
    return positive;
  }
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) {
    std::string a = sample_categorical(PriorDistribution::normalized(remaining), rng);
    out.push_back(a);
    remaining.erase(a);
  }
  return out;
}

ActionTrace select_action(const std::string& description, const std::string& state_id,
                          const std::map<std::string, double>& q_values, SemanticCache& cache,
                          PriorProvider& provider, const EmbeddingConfig& embed_cfg,
                          const TemperatureSchedule& sched, HitRateWindow& window,
                          const SelectOptions& opts, Step now, std::mt19937_64& rng) {
  ActionTrace trace;
  PriorDistribution prior;
  if (opts.uniform_prior) {
    std::vector<std::string> actions;
    for (const auto& [a, _] : q_values) actions.push_back(a);
    prior = PriorDistribution::uniform(actions);
  } else if (!opts.use_cache) {
    prior = provider.prior_for(state_id);
    window.record(false);
  } else {
    Embedding key = embed_text(description, embed_cfg);
    std::optional<LookupResult> found = cache.lookup(key, now);
    if (found) {
      trace.cache_hit = true;
      trace.similarity = found->similarity;
      prior = std::move(found->prior);
    } else {
      prior = provider.prior_for(state_id);
      cache.insert(key, prior, state_id, now);
    }
    window.record(trace.cache_hit);
  }

  trace.prior_used = prior;
  trace.tau = opts.fixed_tau ? *opts.fixed_tau : temperature(window.rate(), sched);
  trace.candidates = sample_candidates(prior, opts.candidates, rng);

  std::map<std::string, double> restricted;
  for (const auto& a : trace.candidates) restricted[a] = prior.prob(a);
  PriorDistribution posterior =
      posterior_weights(PriorDistribution::normalized(restricted), q_values, trace.tau);
  trace.weights.clear();
  for (const auto& a : trace.candidates) trace.weights.push_back(posterior.prob(a));
  trace.chosen = sample_categorical(posterior, rng);
  return trace;
}

}  // namespace cachedrl
