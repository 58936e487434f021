#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cachedrl/env.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace cachedrl;

TEST_CASE("textgrid step rules") {
  TextGridConfig cfg;  // 5x5, start (0,0), key (2,2), door (4,4)
  TextGrid env(cfg);

  SUBCASE("wall bump costs the step penalty and keeps the position") {
    std::string before = env.state_id();
    EnvStep r = env.step("west");
    CHECK(r.reward == doctest::Approx(-0.01));
    CHECK(!r.done);
    CHECK(env.state_id() == before);
  }
  SUBCASE("pickup away from the key changes nothing but the step count") {
    std::string before = env.state_id();
    EnvStep r = env.step("pickup");
    CHECK(r.reward == doctest::Approx(-0.01));
    CHECK(env.state_id() == before);
  }
  SUBCASE("open at the door with the key succeeds with reward 1") {
    TextGridConfig tight{3, {1, 1}, {1, 1}, {1, 2}, 60, false, false};
    // Key underfoot, door one cell away: pickup, move onto the door, open.
    bool opened = false;
    for (const std::string& a : {"north", "south", "east", "west"}) {
      TextGrid probe(tight);
      probe.step("pickup");
      probe.step(a);
      EnvStep fin = probe.step("open");
      if (fin.success) {
        CHECK(fin.reward == doctest::Approx(1.0));
        CHECK(fin.done);
        opened = true;
        break;
      }
    }
    CHECK(opened);
  }
  SUBCASE("open without the key does not finish the episode") {
    TextGridConfig at_door{3, {1, 2}, {0, 0}, {1, 2}, 60, false, false};
    TextGrid e(at_door);
    EnvStep r = e.step("open");
    CHECK(!r.done);
    CHECK(r.reward == doctest::Approx(-0.01));
  }
}

TEST_CASE("episodes are capped at max_steps") {
  TextGridConfig cfg;
  cfg.max_steps = 7;
  TextGrid env(cfg);
  int steps = 0;
  while (!env.done()) {
    env.step("west");  // bumps forever
    ++steps;
  }
  CHECK(steps == 7);
  CHECK_THROWS(env.step("west"));
}

TEST_CASE("description and state id round-trip through describe") {
  TextGrid env;
  CHECK(TextGrid::describe(env.state_id()) == env.description());
  CHECK(env.description().find("You are at") != std::string::npos);
}

TEST_CASE("expert rollouts attain the value-iteration optimal return") {
  TextGridConfig cfg;  // 5x5 fixed layout
  double gamma = 0.95;
  auto q_star = textgrid_q_star(cfg.size, cfg.key, cfg.door, gamma);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> coord(0, cfg.size - 1);
  for (int trial = 0; trial < 25; ++trial) {
    std::string s = TextGrid::make_state_id(cfg.size, {coord(rng), coord(rng)}, cfg.key,
                                            cfg.door, false);
    double best = -1e9;
    for (const std::string& a : TextGrid::actions()) best = std::max(best, q_star.at({s, a}));
    double ret = 0.0, discount = 1.0;
    std::string cur = s;
    bool success = false;
    for (int t = 0; t < 100; ++t) {
      auto [next, r] = TextGrid::transition(cur, TextGrid::expert_action(cur));
      ret += discount * r.reward;
      discount *= gamma;
      cur = next;
      if (r.done) {
        success = r.success;
        break;
      }
    }
    CHECK(success);
    CHECK(ret == doctest::Approx(best).epsilon(1e-8));
  }
}

TEST_CASE("behavior policies are ordered: random < medium < expert success") {
  TextGridConfig cfg;
  cfg.random_start = true;
  cfg.max_steps = 20;  // tight budget: the 50/50 mixture must sometimes run out
  auto success_rate = [&](PolicyTag tag) {
    OfflineDataset ds = generate_offline(cfg, tag, 200, 123);
    int successes = 0, episodes = 0;
    for (const Transition& t : ds.transitions) {
      if (t.done) {
        ++episodes;
        successes += t.reward > 0.5;
      }
    }
    return static_cast<double>(successes) / episodes;
  };
  double random = success_rate(PolicyTag::kRandom);
  double medium = success_rate(PolicyTag::kMedium);
  double expert = success_rate(PolicyTag::kExpert);
  CHECK(expert == doctest::Approx(1.0));
  CHECK(medium > random);
  CHECK(medium < expert);
}

TEST_CASE("dataset generation is byte-identical across reruns") {
  TextGridConfig cfg;
  cfg.random_start = true;
  std::string a = dataset_to_jsonl(generate_offline(cfg, PolicyTag::kMedium, 20, 7));
  std::string b = dataset_to_jsonl(generate_offline(cfg, PolicyTag::kMedium, 20, 7));
  std::string c = dataset_to_jsonl(generate_offline(cfg, PolicyTag::kMedium, 20, 8));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("dataset jsonl round trip") {
  TextGridConfig cfg;
  OfflineDataset ds = generate_offline(cfg, PolicyTag::kExpert, 5, 3);
  OfflineDataset back = dataset_from_jsonl(dataset_to_jsonl(ds));
  REQUIRE(back.transitions.size() == ds.transitions.size());
  for (std::size_t i = 0; i < ds.transitions.size(); ++i) {
    CHECK(back.transitions[i].state_id == ds.transitions[i].state_id);
    CHECK(back.transitions[i].action.symbolic == ds.transitions[i].action.symbolic);
    CHECK(back.transitions[i].reward == doctest::Approx(ds.transitions[i].reward));
    CHECK(back.transitions[i].next_state_id == ds.transitions[i].next_state_id);
    CHECK(back.transitions[i].done == ds.transitions[i].done);
  }
}

TEST_CASE("point reach dynamics") {
  PointReachConfig cfg;
  cfg.start = {0.5, 0.5};
  cfg.goal = {0.5, 0.9};
  PointReach env(cfg);
  Eigen::VectorXd u(1);

  SUBCASE("north at full magnitude moves 0.2 and pays the distance") {
    u << 1.0;
    EnvStep r = env.step({"north", u});
    CHECK(env.position().y() == doctest::Approx(0.7));
    CHECK(env.position().x() == doctest::Approx(0.5));
    CHECK(r.reward == doctest::Approx(-0.2));
  }
  SUBCASE("zero magnitude leaves the position unchanged") {
    u << 0.0;
    env.step({"east", u});
    CHECK(env.position().x() == doctest::Approx(0.5));
    CHECK(env.position().y() == doctest::Approx(0.5));
  }
  SUBCASE("reaching the goal grants the bonus and finishes") {
    u << 1.0;
    env.step({"north", u});
    EnvStep r = env.step({"north", u});  // lands at (0.5, 0.9), distance 0 < tolerance
    CHECK(r.done);
    CHECK(r.success);
    CHECK(r.reward == doctest::Approx(1.0));
  }
  SUBCASE("out-of-range magnitude throws") {
    u << 1.5;
    CHECK_THROWS_AS(env.step({"north", u}), std::invalid_argument);
    u << -0.1;
    CHECK_THROWS_AS(env.step({"north", u}), std::invalid_argument);
  }
  SUBCASE("positions stay inside the unit square") {
    u << 1.0;
    PointReachConfig corner;
    corner.start = {0.05, 0.05};
    corner.goal = {0.9, 0.9};
    PointReach e(corner);
    e.step({"west", u});
    CHECK(e.position().x() == doctest::Approx(0.0));
  }
}
