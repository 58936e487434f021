#include "cachedrl/cache.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

std::int64_t SemanticCache::effective_capacity() const {
  return static_cast<std::int64_t>(std::llround(params_.capacity));
}

std::optional<LookupResult> SemanticCache::lookup(const Embedding& query, Step now) {
  int best = -1;
  double best_sim = -2.0;
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    double sim = cosine_similarity(query, entries_[i].key);
    // >= on equal similarity prefers the later (more recently inserted) entry.
    if (sim > best_sim || (sim == best_sim && best >= 0 &&
                           entries_[i].inserted_at > entries_[best].inserted_at)) {
      best_sim = sim;
      best = i;
    }
  }
  if (best < 0 || !(best_sim > params_.threshold)) {
    ++misses_;
    return std::nullopt;
  }
  CacheEntry& e = entries_[best];
  e.last_access = now;
  ++e.hits;
  ++hits_;
  return LookupResult{e.prior, best_sim, e.source_state_id};
}

std::optional<LookupResult> SemanticCache::peek(const Embedding& query) const {
  int best = -1;
  double best_sim = -2.0;
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    double sim = cosine_similarity(query, entries_[i].key);
    if (sim > best_sim || (sim == best_sim && best >= 0 &&
                           entries_[i].inserted_at > entries_[best].inserted_at)) {
      best_sim = sim;
      best = i;
    }
  }
  if (best < 0 || !(best_sim > params_.threshold)) return std::nullopt;
  return LookupResult{entries_[best].prior, best_sim, entries_[best].source_state_id};
}

std::optional<CacheEntry> SemanticCache::insert(const Embedding& key,
                                                const PriorDistribution& prior,
                                                const std::string& source_state_id, Step now) {
  if (prior.support_size() == 0) throw std::invalid_argument("invalid prior");
  std::optional<CacheEntry> evicted;
  std::int64_t cap = effective_capacity();
  if (static_cast<std::int64_t>(entries_.size()) + 1 > cap && !entries_.empty()) {
    int victim = 0;
    for (int i = 1; i < static_cast<int>(entries_.size()); ++i) {
      const CacheEntry& a = entries_[i];
      const CacheEntry& b = entries_[victim];
      if (a.last_access < b.last_access ||
          (a.last_access == b.last_access && a.inserted_at < b.inserted_at)) {
        victim = i;
      }
    }
    evicted = std::move(entries_[victim]);
    entries_.erase(entries_.begin() + victim);
  }
  entries_.push_back(CacheEntry{key, prior, now, now, 0, source_state_id});
  return evicted;
}

int SemanticCache::refresh_step(
    const std::map<std::string, double>& visitation,
    const std::function<PriorDistribution(const std::string&)>& reprovider,
    std::mt19937_64& rng, Step now) {
  if (entries_.empty()) return 0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) >= params_.refresh_rate) return 0;
  int best = -1;
  double best_score = -1.0;
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    auto it = visitation.find(entries_[i].source_state_id);
    double mu = it == visitation.end() ? 0.0 : it->second;
    if (mu < 0.0) throw std::invalid_argument("negative visitation density");
    double score = mu * static_cast<double>(now - entries_[i].inserted_at);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best < 0) return 0;
  PriorDistribution fresh = reprovider(entries_[best].source_state_id);
  entries_[best].prior = std::move(fresh);
  entries_[best].inserted_at = now;
  return 1;
}

std::string SemanticCache::snapshot_jsonl() const {
  std::ostringstream out;
  for (const CacheEntry& e : entries_) {
    nlohmann::json j;
    j["key"] = std::vector<double>(e.key.values.data(), e.key.values.data() + e.key.values.size());
    j["prior"] = e.prior.probs();
    j["last_access"] = e.last_access;
    j["inserted_at"] = e.inserted_at;
    j["hits"] = e.hits;
    j["source_state_id"] = e.source_state_id;
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace cachedrl
