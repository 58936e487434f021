#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cachedrl/experiment.hpp"

#include <filesystem>
#include <fstream>

using namespace cachedrl;

namespace {

Config small_online() {
  return Config::from_text(
      "env.size = 4\n"
      "env.key_x = 1\nenv.key_y = 1\n"
      "env.door_x = 3\nenv.door_y = 3\n"
      "env.max_steps = 40\n"
      "run.episodes = 30\n");
}

}  // namespace

TEST_CASE("latency_report arithmetic") {
  LatencyModel model;  // 18.7 / 349
  // 0.784 * 18.7 + 0.216 * 349 = 90.0448, i.e. 90.04 within the 0.01 pin.
  CHECK(latency_report(0.784, model, {}).weighted_mean_ms == doctest::Approx(90.0448).epsilon(1e-9));
  CHECK(latency_report(1.0, model, {}).weighted_mean_ms == doctest::Approx(18.7));
  CHECK(latency_report(0.0, model, {}).weighted_mean_ms == doctest::Approx(349.0));
  LatencySummary s = latency_report(0.5, model, {10.0, 20.0, 30.0, 100.0});
  CHECK(s.mean_ms == doctest::Approx(40.0));
  CHECK(s.median_ms == doctest::Approx(25.0));
  CHECK(s.p95_ms >= 30.0);
}

TEST_CASE("uncached variant never touches the cache") {
  RunMetrics m = run_online(small_online(), Variant::kUncached, 4);
  CHECK(m.hit_rate == doctest::Approx(0.0));
  CHECK(m.cache_hits == 0);
  CHECK(m.queries == m.total_steps);
}

TEST_CASE("cached variant satisfies the query accounting identity") {
  RunMetrics m = run_online(small_online(), Variant::kCached, 4);
  CHECK(m.queries == m.cache_misses + m.refreshes);
  CHECK(m.cache_hits + m.cache_misses == m.total_steps);
  CHECK(m.queries < m.total_steps);  // repeated states must hit
  CHECK(static_cast<std::int64_t>(m.step_latencies_ms.size()) == m.total_steps);
}

TEST_CASE("no-prior variant issues no queries") {
  RunMetrics m = run_online(small_online(), Variant::kNoPrior, 4);
  CHECK(m.queries == 0);
}

TEST_CASE("runs are deterministic in config and seed") {
  RunMetrics a = run_online(small_online(), Variant::kCached, 9);
  RunMetrics b = run_online(small_online(), Variant::kCached, 9);
  RunMetrics c = run_online(small_online(), Variant::kCached, 10);
  CHECK(a.total_steps == b.total_steps);
  CHECK(a.queries == b.queries);
  CHECK(a.hit_rate == b.hit_rate);
  REQUIRE(a.episodes.size() == b.episodes.size());
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].episode_return == b.episodes[i].episode_return);
    CHECK(a.episodes[i].steps == b.episodes[i].steps);
  }
  // A different seed produces a different trajectory.
  bool differs = a.total_steps != c.total_steps || a.queries != c.queries;
  for (std::size_t i = 0; !differs && i < std::min(a.episodes.size(), c.episodes.size()); ++i) {
    differs = a.episodes[i].episode_return != c.episodes[i].episode_return;
  }
  CHECK(differs);
}

TEST_CASE("empty suite list writes only the manifest and exits 0") {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "cachedrl_test_empty_suite";
  std::filesystem::remove_all(dir);
  int rc = run_suite(small_online(), {}, dir.string(), {1});
  CHECK(rc == 0);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
}
