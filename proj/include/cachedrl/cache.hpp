#pragma once

#include "cachedrl/embedding.hpp"
#include "cachedrl/prior.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cachedrl {

using Step = std::int64_t;

struct CacheParams {
  double capacity = 500.0;   // K, adapted continuously; effective capacity = round(K)
  double threshold = 0.8;    // delta, strict lower bound on similarity for a hit
  double refresh_rate = 0.1; // r, per-step refresh probability
};

struct CacheRanges {
  double capacity_min = 100.0, capacity_max = 1000.0;
  double threshold_min = 0.5, threshold_max = 0.99;
  double refresh_min = 0.01, refresh_max = 0.2;
};

struct CacheEntry {
  Embedding key;
  PriorDistribution prior;
  Step last_access = 0;
  Step inserted_at = 0;
  std::int64_t hits = 0;
  std::string source_state_id;
};

struct LookupResult {
  PriorDistribution prior;
  double similarity = 0.0;
  std::string source_state_id;
};

// (embedding, prior) store with threshold retrieval, LRU eviction, and
// visitation-weighted refresh. Exhaustive scan; exact at desk-scale capacities.
class SemanticCache {
 public:
  explicit SemanticCache(CacheParams params) : params_(params) {}

  // Returns the maximum-similarity entry if its similarity exceeds the
  // threshold strictly; updates recency metadata and the hit/miss counters.
  // Similarity ties break toward the most recently inserted entry.
  std::optional<LookupResult> lookup(const Embedding& query, Step now);

  // Read-only variant of lookup: no recency update, no hit/miss counting.
  std::optional<LookupResult> peek(const Embedding& query) const;

  // Appends an entry, evicting the least recently used one when the
  // effective capacity round(K) would be exceeded.
  std::optional<CacheEntry> insert(const Embedding& key, const PriorDistribution& prior,
                                   const std::string& source_state_id, Step now);

  // With probability refresh_rate, re-queries the provider for the entry
  // maximizing visitation density times age and replaces its prior in place.
  // Provider exceptions leave the entry unchanged and propagate.
  int refresh_step(const std::map<std::string, double>& visitation,
                   const std::function<PriorDistribution(const std::string&)>& reprovider,
                   std::mt19937_64& rng, Step now);

  CacheParams& params() { return params_; }
  const CacheParams& params() const { return params_; }
  const std::vector<CacheEntry>& entries() const { return entries_; }

  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }
  double hit_rate() const {
    std::int64_t n = hits_ + misses_;
    return n == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(n);
  }

  std::int64_t effective_capacity() const;

  // One JSON object per entry, one per line.
  std::string snapshot_jsonl() const;

 private:
  CacheParams params_;
  std::vector<CacheEntry> entries_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

}  // namespace cachedrl
