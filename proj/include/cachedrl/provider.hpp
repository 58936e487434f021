#pragma once

#include "cachedrl/prior.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace cachedrl {

struct ProviderStats {
  std::int64_t query_count = 0;
  double simulated_latency_total_ms = 0.0;  // virtual clock
};

// Per-query costs on the virtual latency clock.
struct LatencyModel {
  double hit_cost_ms = 18.7;
  double miss_cost_ms = 349.0;
};

class PriorProvider {
 public:
  virtual ~PriorProvider() = default;

  // Produces the prior for a state; counts the query and charges the
  // miss-side latency cost.
  virtual PriorDistribution prior_for(const std::string& state_id) = 0;

  virtual bool adaptable() const { return false; }

  const ProviderStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 protected:
  ProviderStats stats_;
};

// Deterministic oracle: softmax(sharpness * goal-progress score per action).
// Sharpness 0 yields the uniform prior. Per-state logits are adjustable,
// which is what the few-shot adaptation operates on.
class MockProvider : public PriorProvider {
 public:
  using ScoreFn = std::function<std::map<std::string, double>(const std::string&)>;

  MockProvider(ScoreFn scores, double sharpness, LatencyModel latency = {});

  PriorDistribution prior_for(const std::string& state_id) override;
  bool adaptable() const override { return true; }

  // Logits for a state, materialized from the score function on first use.
  std::map<std::string, double>& logits_for(const std::string& state_id);

 private:
  ScoreFn scores_;
  double sharpness_;
  LatencyModel latency_;
  std::map<std::string, std::map<std::string, double>> logits_;
};

struct Demo {
  std::string state_id;
  std::string expert_action;
};

struct AdaptationSet {
  std::vector<Demo> demos;       // distinct state ids
  double lambda_ent = 0.01;
};

// Loss for one demo state: ||softmax(z) - onehot(target)||^2 - lambda * H(softmax(z)).
double adapt_loss(const Eigen::VectorXd& logits, int target_index, double lambda_ent);
// Analytic gradient of adapt_loss with respect to the logits.
Eigen::VectorXd adapt_grad(const Eigen::VectorXd& logits, int target_index, double lambda_ent);

// Gradient-descends the adaptation objective over the demo states' logits.
// Returns the per-iteration total loss. Throws "provider not adaptable" when
// the provider has no adjustable logits (e.g. the wire client).
std::vector<double> adapt_prior(PriorProvider& provider, const AdaptationSet& demos, int steps,
                                double learning_rate);

enum class RemoteFallback { kAbort, kUniform };

struct RemoteConfig {
  std::string url = "http://localhost:8787";
  int timeout_ms = 5000;
  RemoteFallback fallback = RemoteFallback::kAbort;
};

// Wire-protocol client: POST {"state": text, "actions": [...]} to /prior,
// expects {"probs": {name: p}}; missing actions get probability 0 before
// renormalization. Uses wall-clock latency, not the virtual model.
class RemoteProvider : public PriorProvider {
 public:
  RemoteProvider(RemoteConfig cfg, std::vector<std::string> actions,
                 std::function<std::string(const std::string&)> describe = {});

  PriorDistribution prior_for(const std::string& state_id) override;

 private:
  RemoteConfig cfg_;
  std::vector<std::string> actions_;
  std::function<std::string(const std::string&)> describe_;
};

}  // namespace cachedrl
