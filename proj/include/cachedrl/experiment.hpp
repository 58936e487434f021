#pragma once

#include "cachedrl/cache.hpp"
#include "cachedrl/config.hpp"
#include "cachedrl/cql.hpp"
#include "cachedrl/env.hpp"
#include "cachedrl/kl_bound.hpp"
#include "cachedrl/posterior.hpp"
#include "cachedrl/provider.hpp"
#include "cachedrl/rl.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cachedrl {

enum class Variant { kCached, kUncached, kStaticCache, kNoPrior, kFixedTemperature };

std::string variant_name(Variant v);

struct EpisodeRow {
  int episode = 0;
  double episode_return = 0.0;
  bool success = false;
  int steps = 0;
  std::int64_t queries_cum = 0;
  double hit_rate = 0.0;
  double mean_step_latency_ms = 0.0;
};

struct ParamRow {
  std::int64_t step = 0;
  double capacity = 0.0;
  double threshold = 0.0;
  double refresh_rate = 0.0;
  double hit_rate = 0.0;
  double mean_td_error = 0.0;
  double policy_variability = 0.0;
};

struct RunMetrics {
  std::vector<EpisodeRow> episodes;
  std::vector<ParamRow> params;
  std::int64_t total_steps = 0;
  std::int64_t queries = 0;
  std::int64_t refreshes = 0;
  std::int64_t cache_hits = 0;
  std::int64_t cache_misses = 0;
  double hit_rate = 0.0;
  double success_rate_last50 = 0.0;
  double mean_return_last50 = 0.0;
  std::vector<double> step_latencies_ms;
  // Visitation-weighted mean prior error of cache hits per training window.
  std::vector<double> kappa_windows;
  QTable q;
  std::map<std::string, std::int64_t> visits;
  CacheParams final_params;
  double final_tau = 0.0;
};

// Trains one seeded run of the requested ablation variant.
RunMetrics run_online(const Config& cfg, Variant variant, std::uint64_t seed);

struct LatencySummary {
  double hit_rate = 0.0;
  double weighted_mean_ms = 0.0;  // h * hit_cost + (1 - h) * miss_cost
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

LatencySummary latency_report(double hit_rate, const LatencyModel& model,
                              const std::vector<double>& per_step_ms);

// Builds the bound-validation inputs from a trained cached run.
BoundReport run_bound_experiment(const Config& cfg, const RunMetrics& trained,
                                 std::uint64_t seed);

struct FewshotReport {
  double ce_before = 0.0;
  double ce_after = 0.0;
  double success_before = 0.0;
  double success_after = 0.0;
  int demos = 0;
};

FewshotReport run_fewshot(const Config& cfg, std::uint64_t seed);

// Executes the requested suites, writes CSV/JSONL outputs plus a manifest.
// Returns nonzero when any suite-level check fails.
int run_suite(const Config& cfg, const std::vector<std::string>& suites,
              const std::string& out_dir, const std::vector<std::uint64_t>& seeds);

}  // namespace cachedrl
