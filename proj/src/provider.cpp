#include "cachedrl/provider.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace cachedrl {

MockProvider::MockProvider(ScoreFn scores, double sharpness, LatencyModel latency)
    : scores_(std::move(scores)), sharpness_(sharpness), latency_(latency) {
  if (sharpness_ < 0.0) throw std::invalid_argument("sharpness must be non-negative");
}

std::map<std::string, double>& MockProvider::logits_for(const std::string& state_id) {
  auto it = logits_.find(state_id);
  if (it == logits_.end()) {
    std::map<std::string, double> scores = scores_(state_id);
    if (scores.empty()) throw std::invalid_argument("unknown state: " + state_id);
    std::map<std::string, double> logits;
    for (const auto& [a, s] : scores) logits[a] = sharpness_ * s;
    it = logits_.emplace(state_id, std::move(logits)).first;
  }
  return it->second;
}

PriorDistribution MockProvider::prior_for(const std::string& state_id) {
  const std::map<std::string, double>& logits = logits_for(state_id);
  ++stats_.query_count;
  stats_.simulated_latency_total_ms += latency_.miss_cost_ms;
  return PriorDistribution::softmax(logits, 1.0);
}

namespace {

Eigen::VectorXd softmax_vec(const Eigen::VectorXd& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

double adapt_loss(const Eigen::VectorXd& logits, int target_index, double lambda_ent) {
  Eigen::VectorXd p = softmax_vec(logits);
  double loss = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    double y = i == target_index ? 1.0 : 0.0;
    loss += (p[i] - y) * (p[i] - y);
    if (p[i] > 0.0) loss += lambda_ent * p[i] * std::log(p[i]);  // -lambda * H
  }
  return loss;
}

Eigen::VectorXd adapt_grad(const Eigen::VectorXd& logits, int target_index, double lambda_ent) {
  Eigen::VectorXd p = softmax_vec(logits);
  // dL/dp, then pull back through the softmax Jacobian.
  Eigen::VectorXd g(p.size());
  for (int i = 0; i < p.size(); ++i) {
    double y = i == target_index ? 1.0 : 0.0;
    g[i] = 2.0 * (p[i] - y) + lambda_ent * (std::log(std::max(p[i], 1e-300)) + 1.0);
  }
  double pg = p.dot(g);
  return p.array() * (g.array() - pg);
}

std::vector<double> adapt_prior(PriorProvider& provider, const AdaptationSet& demos, int steps,
                                double learning_rate) {
  if (!provider.adaptable()) throw std::invalid_argument("provider not adaptable");
  auto* mock = dynamic_cast<MockProvider*>(&provider);
  if (mock == nullptr) throw std::invalid_argument("provider not adaptable");
  if (demos.demos.empty()) throw std::invalid_argument("adaptation set is empty");
  for (std::size_t i = 0; i < demos.demos.size(); ++i) {
    for (std::size_t j = i + 1; j < demos.demos.size(); ++j) {
      if (demos.demos[i].state_id == demos.demos[j].state_id) {
        throw std::invalid_argument("duplicate demo state: " + demos.demos[i].state_id);
      }
    }
  }
  std::vector<double> loss_curve;
  loss_curve.reserve(steps);
  for (int step = 0; step < steps; ++step) {
    double total = 0.0;
    for (const Demo& d : demos.demos) {
      std::map<std::string, double>& logits = mock->logits_for(d.state_id);
      std::vector<std::string> order;
      Eigen::VectorXd z(static_cast<int>(logits.size()));
      int target = -1;
      int i = 0;
      for (const auto& [a, v] : logits) {
        order.push_back(a);
        z[i] = v;
        if (a == d.expert_action) target = i;
        ++i;
      }
      if (target < 0) throw std::invalid_argument("expert action outside support: " + d.expert_action);
      total += adapt_loss(z, target, demos.lambda_ent);
      Eigen::VectorXd g = adapt_grad(z, target, demos.lambda_ent);
      for (int k = 0; k < z.size(); ++k) logits[order[k]] = z[k] - learning_rate * g[k];
    }
    loss_curve.push_back(total);
  }
  return loss_curve;
}

RemoteProvider::RemoteProvider(RemoteConfig cfg, std::vector<std::string> actions,
                               std::function<std::string(const std::string&)> describe)
    : cfg_(std::move(cfg)), actions_(std::move(actions)), describe_(std::move(describe)) {
  if (actions_.empty()) throw std::invalid_argument("remote provider needs an action vocabulary");
}

PriorDistribution RemoteProvider::prior_for(const std::string& state_id) {
  ++stats_.query_count;
  std::string state_text = describe_ ? describe_(state_id) : state_id;
  nlohmann::json body;
  body["state"] = state_text;
  body["actions"] = actions_;

  auto fail = [&](const std::string& why) -> PriorDistribution {
    if (cfg_.fallback == RemoteFallback::kUniform) {
      fprintf(stderr, "warning: remote prior failed (%s); falling back to uniform\n", why.c_str());
      return PriorDistribution::uniform(actions_);
    }
    throw std::runtime_error("remote prior failed: " + why);
  };

  httplib::Client client(cfg_.url);
  client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
  client.set_read_timeout(0, cfg_.timeout_ms * 1000);
  httplib::Result res = client.Post("/prior", body.dump(), "application/json");
  if (!res || res->status != 200) {
    return fail(res ? "HTTP status " + std::to_string(res->status)
                    : "endpoint unreachable: " + cfg_.url);
  }
  nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("probs") || !parsed["probs"].is_object()) {
    return fail("malformed response body");
  }
  std::map<std::string, double> weights;
  for (const auto& a : actions_) {
    double w = parsed["probs"].value(a, 0.0);
    if (!std::isfinite(w) || w < 0.0) return fail("invalid probability for action " + a);
    weights[a] = w;
  }
  double sum = 0.0;
  for (const auto& [a, w] : weights) sum += w;
  if (sum <= 0.0) return fail("all probabilities are zero");
  return PriorDistribution::normalized(weights);
}

}  // namespace cachedrl
