#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cachedrl/rl.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

using namespace cachedrl;

namespace {

Transition discrete(const std::string& s, const std::string& a, double r, const std::string& s2,
                    bool done) {
  return {s, {a, {}}, r, s2, done};
}

}  // namespace

TEST_CASE("unseen pairs read as zero; set/value round trip") {
  QTable q;
  CHECK(q.value("s", "a") == doctest::Approx(0.0));
  q.set("s", "a", 1.5);
  CHECK(q.value("s", "a") == doctest::Approx(1.5));
  CHECK(q.max_value("s", {"a", "b"}) == doctest::Approx(1.5));
}

TEST_CASE("terminal transition with reward 1 and lr 1 writes Q = 1") {
  QTable q(0.9, 1.0);
  double td = q.update(discrete("s", "go", 1.0, "terminal", true), {"go"});
  CHECK(td == doctest::Approx(1.0));
  CHECK(q.value("s", "go") == doctest::Approx(1.0));
}

TEST_CASE("zero-reward terminal transition on a zero table changes nothing") {
  QTable q(0.9, 0.5);
  double td = q.update(discrete("s", "go", 0.0, "terminal", true), {"go"});
  CHECK(td == doctest::Approx(0.0));
  CHECK(q.value("s", "go") == doctest::Approx(0.0));
}

TEST_CASE("3-state chain converges to the value-iteration fixed point") {
  // s0 -> s1 -> s2 -> done with rewards 0, 0, 1 and gamma 0.9:
  // Q*(s2) = 1, Q*(s1) = 0.9, Q*(s0) = 0.81.
  QTable q(0.9, 0.5);
  std::vector<Transition> episode{
      discrete("s0", "f", 0.0, "s1", false),
      discrete("s1", "f", 0.0, "s2", false),
      discrete("s2", "f", 1.0, "end", true),
  };
  for (int sweep = 0; sweep < 10000; ++sweep) {
    for (const Transition& t : episode) q.update(t, {"f"});
  }
  CHECK(q.value("s0", "f") == doctest::Approx(0.81).epsilon(1e-6));
  CHECK(q.value("s1", "f") == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(q.value("s2", "f") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("values_for materializes a zero-filled action map") {
  QTable q;
  q.set("s", "a", 0.4);
  std::map<std::string, double> v = q.values_for("s", {"a", "b"});
  CHECK(v.at("a") == doctest::Approx(0.4));
  CHECK(v.at("b") == doctest::Approx(0.0));
}

TEST_CASE("replay buffer is FIFO at capacity") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push(discrete("s" + std::to_string(i), "a", 0.0, "t", false));
  REQUIRE(buf.size() == 3);
  CHECK(buf.at(0).state_id == "s2");
  CHECK(buf.at(2).state_id == "s4");
  std::mt19937_64 rng(3);
  std::vector<Transition> batch = buf.sample(2, rng);
  CHECK(batch.size() == 2);
}

TEST_CASE("batch_metrics closed forms") {
  SUBCASE("mean |td| of {1,3} is 2; hit fraction counts hits") {
    BatchMetrics m = batch_metrics({{1.0, true, 0.0}, {-3.0, false, 0.0}});
    CHECK(m.mean_td_error == doctest::Approx(2.0));
    CHECK(m.hit_rate == doctest::Approx(0.5));
  }
  SUBCASE("population std of q {0,2} is 1") {
    BatchMetrics m = batch_metrics({{0.0, false, 0.0}, {0.0, false, 2.0}});
    CHECK(m.policy_variability == doctest::Approx(1.0));
  }
  SUBCASE("permutation invariance") {
    std::vector<Sample> batch{{0.5, true, 1.0}, {1.5, false, -1.0}, {2.5, true, 0.3}};
    BatchMetrics a = batch_metrics(batch);
    std::reverse(batch.begin(), batch.end());
    BatchMetrics b = batch_metrics(batch);
    CHECK(a.mean_td_error == doctest::Approx(b.mean_td_error));
    CHECK(a.hit_rate == doctest::Approx(b.hit_rate));
    CHECK(a.policy_variability == doctest::Approx(b.policy_variability));
  }
  SUBCASE("empty batch throws") { CHECK_THROWS_AS(batch_metrics({}), std::invalid_argument); }
}

TEST_CASE("gaussian head advantage-weighted updates") {
  GaussianHead head(0.3, 0.5, 0.0);  // frozen baseline isolates the mean update
  Eigen::VectorXd u(1);
  u << 0.8;
  Transition t{"b0", {"push", u}, 1.0, "b1", true};  // advantage = 1 - V(b0) = 1 > 0

  SUBCASE("positive advantage pulls the mean toward the control") {
    head.update(t, "b0", "b1", 0.9);
    double m = head.mean("b0", "push");
    CHECK(m > 0.5);  // unseen buckets start at the midpoint 0.5
    CHECK(m <= 0.8);
  }
  SUBCASE("u equal to the mean leaves the mean unchanged") {
    Transition same = t;
    same.action.continuous = Eigen::VectorXd::Constant(1, 0.5);
    head.update(same, "b0", "b1", 0.9);
    CHECK(head.mean("b0", "push") == doctest::Approx(0.5));
  }
  SUBCASE("zero advantage leaves the mean unchanged") {
    Transition flat = t;
    flat.reward = 0.0;
    head.update(flat, "b0", "b1", 0.9);
    CHECK(head.mean("b0", "push") == doctest::Approx(0.5));
  }
  SUBCASE("missing continuous component throws") {
    Transition bad = t;
    bad.action.continuous = {};
    CHECK_THROWS_AS(head.update(bad, "b0", "b1", 0.9), std::invalid_argument);
  }
}

TEST_CASE("gaussian head sampling is clamped and centered on the mean") {
  GaussianHead head(0.3, 0.2, 0.2);
  std::mt19937_64 rng(7);
  double total = 0.0;
  for (int i = 0; i < 5000; ++i) {
    double u = head.sample("b", "push", rng, 0.0, 1.0);
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);
    total += u;
  }
  CHECK(total / 5000.0 == doctest::Approx(0.5).epsilon(0.05));
}
