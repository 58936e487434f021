#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cachedrl/cache.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cachedrl;

namespace {

PriorDistribution two(double pa) { return PriorDistribution({{"a", pa}, {"b", 1.0 - pa}}); }

Embedding emb(const std::string& text) { return embed_text(text); }

// Brute-force reference cache mirroring the documented semantics.
struct RefEntry {
  Embedding key;
  PriorDistribution prior;
  Step last_access, inserted_at;
  std::string source;
};

struct RefCache {
  std::vector<RefEntry> entries;
  CacheParams params;

  std::optional<std::size_t> best(const Embedding& q) const {
    std::optional<std::size_t> arg;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      double sim = q.values.dot(entries[i].key.values);
      if (sim > best_sim ||
          (sim == best_sim && arg && entries[i].inserted_at > entries[*arg].inserted_at)) {
        best_sim = sim;
        arg = i;
      }
    }
    if (!arg || best_sim <= params.threshold) return std::nullopt;
    return arg;
  }

  std::optional<std::pair<PriorDistribution, double>> lookup(const Embedding& q, Step now) {
    std::optional<std::size_t> i = best(q);
    if (!i) return std::nullopt;
    entries[*i].last_access = now;
    return std::make_pair(entries[*i].prior, q.values.dot(entries[*i].key.values));
  }

  std::optional<std::string> insert(const Embedding& k, const PriorDistribution& p,
                                    const std::string& source, Step now) {
    std::optional<std::string> evicted;
    auto cap = static_cast<std::size_t>(std::llround(params.capacity));
    if (entries.size() >= cap) {
      std::size_t victim = 0;
      for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].last_access < entries[victim].last_access ||
            (entries[i].last_access == entries[victim].last_access &&
             entries[i].inserted_at < entries[victim].inserted_at)) {
          victim = i;
        }
      }
      evicted = entries[victim].source;
      entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    entries.push_back({k, p, now, now, source});
    return evicted;
  }
};

}  // namespace

TEST_CASE("empty cache misses; identical key hits with similarity 1") {
  SemanticCache cache({5, 0.8, 0.1});
  Embedding e = emb("go north now");
  CHECK(!cache.lookup(e, 0).has_value());
  cache.insert(e, two(0.7), "s0", 1);
  auto hit = cache.lookup(e, 2);
  REQUIRE(hit.has_value());
  CHECK(hit->similarity == doctest::Approx(1.0));
  CHECK(hit->prior == two(0.7));
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 1);
}

TEST_CASE("maximum-similarity entry wins among those above threshold") {
  SemanticCache cache({5, 0.5, 0.1});
  cache.insert(emb("alpha beta gamma"), two(0.1), "s1", 1);
  cache.insert(emb("alpha beta gamma delta"), two(0.2), "s2", 2);
  auto hit = cache.lookup(emb("alpha beta gamma delta"), 3);
  REQUIRE(hit.has_value());
  CHECK(hit->source_state_id == "s2");
  CHECK(hit->similarity == doctest::Approx(1.0));
}

TEST_CASE("similarity ties break toward the most recently inserted entry") {
  SemanticCache cache({5, 0.5, 0.1});
  Embedding e = emb("one two three");
  cache.insert(e, two(0.1), "older", 1);
  cache.insert(e, two(0.9), "newer", 2);
  auto hit = cache.lookup(e, 3);
  REQUIRE(hit.has_value());
  CHECK(hit->source_state_id == "newer");
}

TEST_CASE("strict threshold: similarity exactly equal to delta is a miss") {
  Embedding stored = emb("alpha beta gamma");
  Embedding query = emb("alpha beta delta");
  double sim = cosine_similarity(stored, query);
  SemanticCache at_delta({5, sim, 0.1});
  at_delta.insert(stored, two(0.5), "s", 1);
  CHECK(!at_delta.lookup(query, 2).has_value());
  SemanticCache below({5, std::nextafter(sim, -1.0), 0.1});
  below.insert(stored, two(0.5), "s", 1);
  CHECK(below.lookup(query, 2).has_value());
}

TEST_CASE("LRU eviction: capacity 2, third insert evicts first") {
  SemanticCache cache({2, 0.9, 0.1});
  cache.insert(emb("aaa bbb"), two(0.1), "A", 1);
  cache.insert(emb("ccc ddd"), two(0.2), "B", 2);
  auto evicted = cache.insert(emb("eee fff"), two(0.3), "C", 3);
  REQUIRE(evicted.has_value());
  CHECK(evicted->source_state_id == "A");
  CHECK(cache.entries().size() == 2);
}

TEST_CASE("lookup refreshes recency: hit on A makes B the LRU victim") {
  SemanticCache cache({2, 0.5, 0.1});
  Embedding a = emb("aaa bbb"), b = emb("ccc ddd");
  cache.insert(a, two(0.1), "A", 1);
  cache.insert(b, two(0.2), "B", 2);
  REQUIRE(cache.lookup(a, 3).has_value());
  auto evicted = cache.insert(emb("eee fff"), two(0.3), "C", 4);
  REQUIRE(evicted.has_value());
  CHECK(evicted->source_state_id == "B");
}

TEST_CASE("large capacity never evicts") {
  SemanticCache cache({1000, 0.9, 0.1});
  for (int i = 0; i < 10; ++i) {
    CHECK(!cache.insert(emb("state number " + std::to_string(i)), two(0.5),
                        "s" + std::to_string(i), i)
               .has_value());
  }
  CHECK(cache.entries().size() == 10);
}

TEST_CASE("peek neither mutates recency nor counts") {
  SemanticCache cache({2, 0.5, 0.1});
  Embedding a = emb("aaa bbb"), b = emb("ccc ddd");
  cache.insert(a, two(0.1), "A", 1);
  cache.insert(b, two(0.2), "B", 2);
  auto peeked = cache.peek(a);
  REQUIRE(peeked.has_value());
  CHECK(peeked->source_state_id == "A");
  CHECK(cache.hits() == 0);
  CHECK(cache.misses() == 0);
  // A's recency was not refreshed, so A is still the LRU victim.
  auto evicted = cache.insert(emb("eee fff"), two(0.3), "C", 3);
  REQUIRE(evicted.has_value());
  CHECK(evicted->source_state_id == "A");
}

TEST_CASE("oracle equivalence over a 10^3-operation random workload") {
  std::mt19937_64 rng(42);
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("token" + std::to_string(i));
  auto random_text = [&]() {
    std::uniform_int_distribution<int> len(1, 4);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::string t;
    int n = len(rng);
    for (int i = 0; i < n; ++i) t += (i ? " " : "") + pool[pick(rng)];
    return t;
  };

  SemanticCache cache({8, 0.6, 0.1});
  RefCache ref;
  ref.params = cache.params();
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::int64_t lookups = 0;
  for (Step now = 0; now < 1000; ++now) {
    std::string text = random_text();
    Embedding e = emb(text);
    if (coin(rng) < 0.5) {
      ++lookups;
      auto got = cache.lookup(e, now);
      auto want = ref.lookup(e, now);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(got->similarity == doctest::Approx(want->second).epsilon(1e-12));
        CHECK(got->prior == want->first);
      }
    } else {
      PriorDistribution p = two(coin(rng));
      auto got = cache.insert(e, p, text, now);
      auto want = ref.insert(e, p, text, now);
      REQUIRE(got.has_value() == want.has_value());
      if (got) CHECK(got->source_state_id == *want);
    }
    CHECK(static_cast<std::int64_t>(cache.entries().size()) <= cache.effective_capacity());
  }
  CHECK(cache.hits() + cache.misses() == lookups);
}

TEST_CASE("threshold monotonicity on a replayed workload") {
  std::mt19937_64 rng(7);
  std::vector<std::string> pool;
  for (int i = 0; i < 15; ++i) pool.push_back("w" + std::to_string(i));
  std::vector<std::pair<bool, std::string>> ops;  // (is_lookup, text)
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    std::string t = pool[pick(rng)] + " " + pool[pick(rng)];
    ops.emplace_back(coin(rng) < 0.5, t);
  }
  auto replay = [&](double delta) {
    SemanticCache cache({50, delta, 0.1});
    Step now = 0;
    for (const auto& [is_lookup, text] : ops) {
      ++now;
      if (is_lookup) {
        cache.lookup(emb(text), now);
      } else {
        cache.insert(emb(text), two(0.5), text, now);
      }
    }
    return cache.hits();
  };
  std::int64_t prev = replay(0.5);
  for (double delta : {0.7, 0.9, 0.99}) {
    std::int64_t h = replay(delta);
    CHECK(h <= prev);
    prev = h;
  }
}

TEST_CASE("refresh selects the max mu*age entry and replaces in place") {
  SemanticCache cache({5, 0.8, 1.0});  // refresh probability 1: always fires
  cache.insert(emb("first state"), two(0.1), "s1", 0);   // age 10 at now=10
  cache.insert(emb("second state"), two(0.2), "s2", 8);  // age 2 at now=10
  std::map<std::string, double> visitation{{"s1", 0.5}, {"s2", 0.9}};
  // scores: 0.5*10 = 5 vs 0.9*2 = 1.8 -> s1 refreshed
  std::mt19937_64 rng(1);
  int refreshed = cache.refresh_step(
      visitation, [](const std::string&) { return two(0.99); }, rng, 10);
  CHECK(refreshed == 1);
  const CacheEntry& e1 = cache.entries()[0];
  CHECK(e1.source_state_id == "s1");
  CHECK(e1.prior == two(0.99));
  CHECK(e1.inserted_at == 10);
  CHECK(cache.entries()[1].prior == two(0.2));
}

TEST_CASE("refresh never fires at rate 0") {
  SemanticCache cache({5, 0.8, 0.0});
  cache.insert(emb("a state"), two(0.5), "s", 0);
  std::mt19937_64 rng(3);
  for (Step now = 1; now <= 200; ++now) {
    CHECK(cache.refresh_step({{"s", 1.0}}, [](const std::string&) { return two(0.1); }, rng,
                             now) == 0);
  }
  CHECK(cache.entries()[0].prior == two(0.5));
}

TEST_CASE("provider failure during refresh leaves the entry unchanged") {
  SemanticCache cache({5, 0.8, 1.0});
  cache.insert(emb("a state"), two(0.5), "s", 0);
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(cache.refresh_step(
                      {{"s", 1.0}},
                      [](const std::string&) -> PriorDistribution {
                        throw std::runtime_error("provider down");
                      },
                      rng, 5),
                  std::runtime_error);
  CHECK(cache.entries()[0].prior == two(0.5));
  CHECK(cache.entries()[0].inserted_at == 0);
}

TEST_CASE("snapshot is one JSON object per entry") {
  SemanticCache cache({5, 0.8, 0.1});
  cache.insert(emb("x y"), two(0.5), "s1", 1);
  cache.insert(emb("y z"), two(0.25), "s2", 2);
  std::string snap = cache.snapshot_jsonl();
  CHECK(std::count(snap.begin(), snap.end(), '\n') == 2);
  CHECK(snap.find("\"s1\"") != std::string::npos);
  CHECK(snap.find("\"s2\"") != std::string::npos);
}
