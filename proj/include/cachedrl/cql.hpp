#pragma once

#include "cachedrl/cache.hpp"
#include "cachedrl/env.hpp"
#include "cachedrl/meta.hpp"
#include "cachedrl/provider.hpp"
#include "cachedrl/rl.hpp"

#include <map>
#include <string>
#include <vector>

namespace cachedrl {

struct CQLConfig {
  double alpha_cql = 1.0;       // conservatism weight
  double beta_prior = 0.0;      // prior weight; 0 recovers standard CQL
  int epochs = 300;
  int convergence_window = 50;  // epochs within 1% of the final value
  double lr = 0.5;
  double gamma = 0.95;
  int batch_size = 64;
  int eval_every = 10;
  int eval_episodes = 20;
  // Freeze the TD target when computing the gradient (standard Q-learning
  // update). Off by default so the gradient matches finite differences of
  // the loss as written.
  bool semi_gradient = false;
};

enum class PriorSource { kNone, kUncached, kStaticCache, kAdaptiveCache };

struct CQLLoss {
  double loss = 0.0;
  std::map<std::pair<std::string, std::string>, double> grad;
};

// L_TD + alpha * (logsumexp - E_behavior[Q]) - beta * E_prior[Q], with the
// analytic gradient over every touched Q entry. The TD target is
// differentiated through the greedy action, so the gradient matches finite
// differences of the loss as written.
CQLLoss cql_prior_loss(const QTable& q, const std::vector<Transition>& batch,
                       const std::map<std::string, PriorDistribution>& behavior,
                       const std::map<std::string, PriorDistribution>& prior,
                       const std::vector<std::string>& actions, const CQLConfig& cfg);

// Empirical state-conditional action frequencies with Laplace smoothing 1.
std::map<std::string, PriorDistribution> estimate_behavior(const OfflineDataset& ds,
                                                           const std::vector<std::string>& actions);

struct OfflineResult {
  QTable q;
  std::vector<std::pair<int, double>> curve;  // (epoch, normalized performance)
  int epochs_to_converge = 0;
  double final_performance = 0.0;
  double query_ratio = -1.0;  // provider queries / distinct dataset states; -1 when no prior
  std::int64_t provider_queries = 0;
  CacheParams final_cache_params;  // meaningful for cached sources only
};

struct OfflineTrainInputs {
  OfflineDataset dataset;
  TextGridConfig env_cfg;
  CQLConfig cfg;
  PriorSource source = PriorSource::kNone;
  double provider_sharpness = 2.0;
  EmbeddingConfig embed_cfg;
  CacheParams cache_params;
  MetaConfig meta_cfg;
  std::uint64_t seed = 0;
};

OfflineResult train_offline(const OfflineTrainInputs& in);

}  // namespace cachedrl
