#include "cachedrl/embedding.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace cachedrl {

std::uint64_t hash64(const std::string& token, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9e3779b97f4a7c15ull);
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ull;
  }
  // Final avalanche (splitmix64) so low bits are usable for bucketing.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

void hash_feature(const std::string& feature, const EmbeddingConfig& cfg, Eigen::VectorXd& acc) {
  std::uint64_t h = hash64(feature, cfg.seed);
  int bucket = static_cast<int>(h % static_cast<std::uint64_t>(cfg.dim));
  double sign = ((h >> 63) & 1u) ? -1.0 : 1.0;
  acc[bucket] += sign;
}

Embedding finalize(Eigen::VectorXd acc) {
  double norm = acc.norm();
  if (norm < 1e-15) {
    // Cancellation can zero the accumulator; fall back to a canonical unit vector.
    acc.setZero();
    acc[0] = 1.0;
  } else {
    acc /= norm;
  }
  return Embedding{std::move(acc)};
}

}  // namespace

Embedding embed_text(const std::string& description, const EmbeddingConfig& cfg) {
  std::vector<std::string> tokens = tokenize(description);
  if (tokens.empty()) throw std::invalid_argument("empty state description");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg.dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    hash_feature("1:" + tokens[i], cfg, acc);
    if (i + 1 < tokens.size()) hash_feature("2:" + tokens[i] + " " + tokens[i + 1], cfg, acc);
  }
  return finalize(std::move(acc));
}

Embedding embed_numeric(const Eigen::VectorXd& state, const EmbeddingConfig& cfg) {
  if (state.size() == 0) throw std::invalid_argument("empty numeric state");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg.dim);
  double span = cfg.numeric_hi - cfg.numeric_lo;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    if (!std::isfinite(state[i])) throw std::invalid_argument("non-finite entry in numeric state");
    double t = (state[i] - cfg.numeric_lo) / span;
    int bucket = static_cast<int>(std::floor(t * cfg.numeric_buckets));
    if (bucket < 0) bucket = 0;
    if (bucket >= cfg.numeric_buckets) bucket = cfg.numeric_buckets - 1;
    hash_feature("n:" + std::to_string(i) + ":" + std::to_string(bucket), cfg, acc);
  }
  return finalize(std::move(acc));
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  return a.values.dot(b.values);
}

}  // namespace cachedrl
