#include "cachedrl/meta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cachedrl {

namespace {
double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }
}  // namespace

SurrogateGradients surrogate_gradients(const CacheParams& params, const BatchMetrics& m,
                                       const MetaConfig& cfg) {
  if (!(m.hit_rate >= 0.0 && m.hit_rate <= 1.0)) throw std::invalid_argument("hit rate out of [0,1]");
  if (!std::isfinite(m.mean_td_error) || m.mean_td_error < 0.0)
    throw std::invalid_argument("invalid mean TD error");
  if (!std::isfinite(m.policy_variability) || m.policy_variability < 0.0)
    throw std::invalid_argument("invalid policy variability");
  SurrogateGradients g;
  g.capacity = cfg.lambda_capacity * (1.0 - m.hit_rate) / params.capacity;
  g.threshold = -cfg.lambda_threshold * m.mean_td_error / params.threshold;
  g.refresh = cfg.lambda_refresh * m.policy_variability;
  return g;
}

CacheParams meta_update(const CacheParams& params, const BatchMetrics& m, const MetaConfig& cfg) {
  SurrogateGradients g = surrogate_gradients(params, m, cfg);
  CacheParams out;
  out.capacity = clip(params.capacity + cfg.eta_capacity * g.capacity,
                      cfg.ranges.capacity_min, cfg.ranges.capacity_max);
  out.threshold = clip(params.threshold + cfg.eta_threshold * g.threshold,
                       cfg.ranges.threshold_min, cfg.ranges.threshold_max);
  out.refresh_rate = clip(params.refresh_rate + cfg.eta_refresh * g.refresh,
                          cfg.ranges.refresh_min, cfg.ranges.refresh_max);
  return out;
}

}  // namespace cachedrl
