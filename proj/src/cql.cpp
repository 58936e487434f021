#include "cachedrl/cql.hpp"

#include "cachedrl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cachedrl {

CQLLoss cql_prior_loss(const QTable& q, const std::vector<Transition>& batch,
                       const std::map<std::string, PriorDistribution>& behavior,
                       const std::map<std::string, PriorDistribution>& prior,
                       const std::vector<std::string>& actions, const CQLConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double inv_n = 1.0 / static_cast<double>(batch.size());
  CQLLoss out;

  for (const Transition& t : batch) {
    // TD term, differentiated through the greedy next action.
    double target = t.reward;
    std::string best_next;
    if (!t.done) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& a : actions) {
        double v = q.value(t.next_state_id, a);
        if (v > best) {
          best = v;
          best_next = a;
        }
      }
      target += cfg.gamma * best;
    }
    double d = q.value(t.state_id, t.action.symbolic) - target;
    out.loss += inv_n * d * d;
    out.grad[{t.state_id, t.action.symbolic}] += inv_n * 2.0 * d;
    // The full gradient flows through the greedy next action so the analytic
    // gradient equals finite differences of the loss as written; training
    // uses the standard semi-gradient (frozen target) instead.
    if (!t.done && !cfg.semi_gradient) {
      out.grad[{t.next_state_id, best_next}] -= inv_n * 2.0 * d * cfg.gamma;
    }

    // Conservatism: logsumexp over actions minus the behavior expectation.
    if (cfg.alpha_cql != 0.0) {
      auto bit = behavior.find(t.state_id);
      if (bit == behavior.end()) {
        throw std::invalid_argument("state missing from behavior map: " + t.state_id);
      }
      double q_max = -std::numeric_limits<double>::infinity();
      for (const auto& a : actions) q_max = std::max(q_max, q.value(t.state_id, a));
      double z = 0.0;
      for (const auto& a : actions) z += std::exp(q.value(t.state_id, a) - q_max);
      double lse = q_max + std::log(z);
      double behavior_q = 0.0;
      for (const auto& a : actions) behavior_q += bit->second.prob(a) * q.value(t.state_id, a);
      out.loss += inv_n * cfg.alpha_cql * (lse - behavior_q);
      for (const auto& a : actions) {
        double softmax_a = std::exp(q.value(t.state_id, a) - q_max) / z;
        out.grad[{t.state_id, a}] += inv_n * cfg.alpha_cql * (softmax_a - bit->second.prob(a));
      }
    }

    // Prior term upweights actions favored by the cached prior.
    if (cfg.beta_prior != 0.0) {
      auto pit = prior.find(t.state_id);
      if (pit == prior.end()) {
        throw std::invalid_argument("state missing from prior map: " + t.state_id);
      }
      double prior_q = 0.0;
      for (const auto& a : actions) prior_q += pit->second.prob(a) * q.value(t.state_id, a);
      out.loss -= inv_n * cfg.beta_prior * prior_q;
      for (const auto& a : actions) {
        out.grad[{t.state_id, a}] -= inv_n * cfg.beta_prior * pit->second.prob(a);
      }
    }
  }
  return out;
}

std::map<std::string, PriorDistribution> estimate_behavior(
    const OfflineDataset& ds, const std::vector<std::string>& actions) {
  std::map<std::string, std::map<std::string, double>> counts;
  for (const Transition& t : ds.transitions) {
    auto& row = counts[t.state_id];
    if (row.empty()) {
      for (const auto& a : actions) row[a] = 1.0;  // Laplace smoothing
    }
    row[t.action.symbolic] += 1.0;
  }
  std::map<std::string, PriorDistribution> out;
  for (auto& [s, row] : counts) out.emplace(s, PriorDistribution::normalized(row));
  return out;
}

namespace {

std::string greedy_action(const QTable& q, const std::string& state,
                          const std::vector<std::string>& actions) {
  std::string best = actions.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (const auto& a : actions) {
    double v = q.value(state, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

double mean_return(const TextGridConfig& cfg, std::uint64_t eval_seed, int episodes,
                   const std::function<std::string(const std::string&)>& policy) {
  std::mt19937_64 rng(eval_seed);
  TextGridConfig ecfg = cfg;
  ecfg.random_start = true;
  TextGrid env(ecfg);
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(rng);
    double ret = 0.0;
    while (!env.done()) ret += env.step(policy(env.state_id())).reward;
    total += ret;
  }
  return total / static_cast<double>(episodes);
}

}  // namespace

OfflineResult train_offline(const OfflineTrainInputs& in) {
  if (in.dataset.transitions.empty()) throw std::invalid_argument("empty offline dataset");
  const std::vector<std::string>& actions = TextGrid::actions();

  std::vector<std::string> distinct_states;
  {
    std::map<std::string, bool> seen;
    for (const Transition& t : in.dataset.transitions) {
      if (!seen.count(t.state_id)) {
        seen[t.state_id] = true;
        distinct_states.push_back(t.state_id);
      }
    }
  }

  std::map<std::string, PriorDistribution> behavior = estimate_behavior(in.dataset, actions);
  MockProvider provider([](const std::string& s) { return TextGrid::action_scores(s); },
                        in.provider_sharpness);
  SemanticCache cache(in.cache_params);

  // Normalization anchors: expert and random returns on the eval start states.
  std::uint64_t eval_seed = in.seed ^ 0x5eedf00dULL;
  double expert_ret = mean_return(in.env_cfg, eval_seed, in.cfg.eval_episodes,
                                  [](const std::string& s) { return TextGrid::expert_action(s); });
  std::mt19937_64 rand_rng(in.seed ^ 0xabcdULL);
  std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
  double random_ret = mean_return(in.env_cfg, eval_seed, in.cfg.eval_episodes,
                                  [&](const std::string&) { return actions[pick(rand_rng)]; });
  double denom = std::max(expert_ret - random_ret, 1e-9);

  // Priors for the loss. The cached sources stream every batch state through
  // the semantic cache so the query count reflects the caching policy.
  std::map<std::string, PriorDistribution> priors;
  bool use_prior = in.source != PriorSource::kNone;
  auto prior_for = [&](const std::string& s) -> const PriorDistribution& {
    auto it = priors.find(s);
    if (it != priors.end()) return it->second;
    PriorDistribution p;
    if (in.source == PriorSource::kUncached) {
      p = provider.prior_for(s);
    } else {
      Embedding key = embed_text(TextGrid::describe(s), in.embed_cfg);
      Step now = static_cast<Step>(priors.size());
      std::optional<LookupResult> found = cache.lookup(key, now);
      if (found) {
        p = std::move(found->prior);
      } else {
        p = provider.prior_for(s);
        cache.insert(key, p, s, now);
      }
    }
    return priors.emplace(s, std::move(p)).first->second;
  };

  QTable q(in.cfg.gamma, in.cfg.lr);
  std::mt19937_64 rng(in.seed);
  std::vector<std::size_t> order(in.dataset.transitions.size());
  std::iota(order.begin(), order.end(), 0);

  OfflineResult result;
  for (int epoch = 0; epoch < in.cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t off = 0; off < order.size(); off += in.cfg.batch_size) {
      std::vector<Transition> batch;
      for (std::size_t i = off; i < std::min(off + in.cfg.batch_size, order.size()); ++i) {
        batch.push_back(in.dataset.transitions[order[i]]);
      }
      if (use_prior) {
        for (const Transition& t : batch) prior_for(t.state_id);
      }
      CQLConfig loss_cfg = in.cfg;
      loss_cfg.semi_gradient = true;
      if (!use_prior) loss_cfg.beta_prior = 0.0;
      CQLLoss l = cql_prior_loss(q, batch, behavior, priors, actions, loss_cfg);
      for (const auto& [key, g] : l.grad) {
        q.set(key.first, key.second, q.value(key.first, key.second) - in.cfg.lr * g);
      }
      // Meta update once per training batch for the adaptive-cache source.
      if (in.source == PriorSource::kAdaptiveCache) {
        std::vector<Sample> samples;
        for (const Transition& t : batch) {
          double target = t.reward;
          if (!t.done) target += in.cfg.gamma * q.max_value(t.next_state_id, actions);
          samples.push_back(Sample{target - q.value(t.state_id, t.action.symbolic), false,
                                   q.value(t.state_id, t.action.symbolic)});
        }
        BatchMetrics m = batch_metrics(samples);
        m.hit_rate = cache.hit_rate();
        cache.params() = meta_update(cache.params(), m, in.meta_cfg);
      }
    }

    if ((epoch + 1) % in.cfg.eval_every == 0 || epoch + 1 == in.cfg.epochs) {
      double ret = mean_return(in.env_cfg, eval_seed, in.cfg.eval_episodes,
                               [&](const std::string& s) { return greedy_action(q, s, actions); });
      result.curve.emplace_back(epoch + 1, (ret - random_ret) / denom);
    }
  }

  result.q = std::move(q);
  result.final_performance = result.curve.back().second;
  // First epoch after which performance stays within 1% of the final value
  // for convergence_window consecutive epochs.
  double tol = 0.01 * std::max(std::abs(result.final_performance), 1e-6);
  result.epochs_to_converge = in.cfg.epochs;
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    int start = result.curve[i].first;
    bool stable = true;
    for (std::size_t j = i; j < result.curve.size(); ++j) {
      if (result.curve[j].first > start + in.cfg.convergence_window) break;
      if (std::abs(result.curve[j].second - result.final_performance) > tol) {
        stable = false;
        break;
      }
    }
    if (stable && start + in.cfg.convergence_window <= in.cfg.epochs) {
      result.epochs_to_converge = start;
      break;
    }
  }
  result.provider_queries = provider.stats().query_count;
  result.final_cache_params = cache.params();
  result.query_ratio =
      use_prior ? static_cast<double>(result.provider_queries) /
                      static_cast<double>(distinct_states.size())
                : -1.0;
  return result;
}

}  // namespace cachedrl
