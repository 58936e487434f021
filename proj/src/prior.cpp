#include "cachedrl/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachedrl {

PriorDistribution::PriorDistribution(std::map<std::string, double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("prior has empty support");
  double sum = 0.0;
  for (const auto& [action, p] : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative probability for action " + action);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("prior probabilities sum to " + std::to_string(sum));
  }
}

PriorDistribution PriorDistribution::normalized(const std::map<std::string, double>& weights) {
  if (weights.empty()) throw std::invalid_argument("prior has empty support");
  double sum = 0.0;
  for (const auto& [action, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("invalid weight for action " + action);
    }
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("all prior weights are zero");
  std::map<std::string, double> probs;
  for (const auto& [action, w] : weights) probs[action] = w / sum;
  // Reassign the largest entry so the sum is exactly renormalized.
  PriorDistribution out;
  out.probs_ = std::move(probs);
  return out;
}

PriorDistribution PriorDistribution::uniform(const std::vector<std::string>& actions) {
  if (actions.empty()) throw std::invalid_argument("prior has empty support");
  std::map<std::string, double> probs;
  for (const auto& a : actions) probs[a] = 1.0 / static_cast<double>(actions.size());
  PriorDistribution out;
  out.probs_ = std::move(probs);
  return out;
}

PriorDistribution PriorDistribution::softmax(const std::map<std::string, double>& scores,
                                             double scale) {
  if (scores.empty()) throw std::invalid_argument("prior has empty support");
  double max_score = scores.begin()->second;
  for (const auto& [a, s] : scores) max_score = std::max(max_score, s);
  std::map<std::string, double> weights;
  for (const auto& [a, s] : scores) weights[a] = std::exp(scale * (s - max_score));
  return normalized(weights);
}

double PriorDistribution::prob(const std::string& action) const {
  auto it = probs_.find(action);
  return it == probs_.end() ? 0.0 : it->second;
}

double entropy(const PriorDistribution& p) {
  double h = 0.0;
  for (const auto& [a, prob] : p.probs()) {
    if (prob > 0.0) h -= prob * std::log(prob);
  }
  return h;
}

PriorDistribution floored(const PriorDistribution& p, const std::vector<std::string>& support,
                          double floor) {
  std::map<std::string, double> weights;
  for (const auto& a : support) weights[a] = std::max(p.prob(a), floor);
  for (const auto& [a, prob] : p.probs()) weights[a] = std::max(prob, floor);
  return PriorDistribution::normalized(weights);
}

double kl_divergence(const PriorDistribution& p, const PriorDistribution& q, double floor) {
  std::vector<std::string> support;
  for (const auto& [a, _] : p.probs()) support.push_back(a);
  for (const auto& [a, _] : q.probs()) support.push_back(a);
  PriorDistribution pf = floored(p, support, floor);
  PriorDistribution qf = floored(q, support, floor);
  double kl = 0.0;
  for (const auto& [a, pp] : pf.probs()) kl += pp * std::log(pp / qf.prob(a));
  return kl;
}

}  // namespace cachedrl
