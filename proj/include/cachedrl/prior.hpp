#pragma once

#include <map>
#include <string>
#include <vector>

namespace cachedrl {

// Normalized categorical distribution over symbolic actions.
class PriorDistribution {
 public:
  PriorDistribution() = default;

  // Validates non-negativity, non-empty support, and sum = 1 within 1e-9.
  // Throws std::invalid_argument otherwise.
  explicit PriorDistribution(std::map<std::string, double> probs);

  // Normalizes non-negative weights to sum 1. Throws if all weights are zero.
  static PriorDistribution normalized(const std::map<std::string, double>& weights);

  static PriorDistribution uniform(const std::vector<std::string>& actions);

  // softmax(scale * score) over the given per-action scores.
  static PriorDistribution softmax(const std::map<std::string, double>& scores, double scale);

  const std::map<std::string, double>& probs() const { return probs_; }
  double prob(const std::string& action) const;
  std::size_t support_size() const { return probs_.size(); }

  bool operator==(const PriorDistribution& other) const { return probs_ == other.probs_; }

 private:
  std::map<std::string, double> probs_;
};

// Shannon entropy in nats.
double entropy(const PriorDistribution& p);

// KL(p || q) with both distributions floored at `floor` and renormalized,
// so the result is finite even with zero-probability actions.
double kl_divergence(const PriorDistribution& p, const PriorDistribution& q,
                     double floor = 1e-12);

// Floors every probability at `floor` over the union support and renormalizes.
PriorDistribution floored(const PriorDistribution& p, const std::vector<std::string>& support,
                          double floor = 1e-12);

}  // namespace cachedrl
