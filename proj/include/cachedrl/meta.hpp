#pragma once

#include "cachedrl/cache.hpp"

namespace cachedrl {

// Batch performance metrics driving the cache parameter adaptation.
struct BatchMetrics {
  double mean_td_error = 0.0;     // non-negative
  double hit_rate = 0.0;          // in [0, 1]
  double policy_variability = 0.0;  // std of Q(s,a) over the batch
};

struct MetaConfig {
  double lambda_capacity = 0.05;
  double lambda_threshold = 0.1;
  double lambda_refresh = 0.02;
  double eta_capacity = 1e-3;
  double eta_threshold = 5e-4;
  double eta_refresh = 1e-4;
  CacheRanges ranges;
};

struct SurrogateGradients {
  double capacity = 0.0;
  double threshold = 0.0;
  double refresh = 0.0;
};

// Heuristic gradients: grow the cache when hits are scarce, loosen the
// threshold when TD error is high, refresh faster when the policy is volatile.
SurrogateGradients surrogate_gradients(const CacheParams& params, const BatchMetrics& m,
                                       const MetaConfig& cfg);

// One ascent step followed by projection into the configured ranges.
CacheParams meta_update(const CacheParams& params, const BatchMetrics& m, const MetaConfig& cfg);

}  // namespace cachedrl
