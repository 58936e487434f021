#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cachedrl {

// Unit-norm embedding key used for semantic cache lookups.
struct Embedding {
  Eigen::VectorXd values;

  int dim() const { return static_cast<int>(values.size()); }
};

struct EmbeddingConfig {
  int dim = 64;
  std::uint64_t seed = 0;
  // Per-coordinate bucketization for numeric states.
  int numeric_buckets = 8;
  double numeric_lo = 0.0;
  double numeric_hi = 1.0;
};

// Seeded 64-bit FNV-1a; the embedding is bit-reproducible across platforms.
std::uint64_t hash64(const std::string& token, std::uint64_t seed);

// Signed feature hashing of word 1- and 2-grams, L2-normalized.
// Throws std::invalid_argument on empty/whitespace-only input.
Embedding embed_text(const std::string& description, const EmbeddingConfig& cfg = {});

// Bucketizes each coordinate into cfg.numeric_buckets uniform bins over
// [numeric_lo, numeric_hi] and hashes the bucket indicators.
// Throws std::invalid_argument on empty input or non-finite entries.
Embedding embed_numeric(const Eigen::VectorXd& state, const EmbeddingConfig& cfg = {});

// Dot product of two unit vectors; result lies in [-1, 1].
double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace cachedrl
