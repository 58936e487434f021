#pragma once

#include "cachedrl/rl.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace cachedrl {

struct EnvStep {
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

struct GridPos {
  int x = 0;
  int y = 0;
  bool operator==(const GridPos&) const = default;
};

struct TextGridConfig {
  int size = 5;
  GridPos start{0, 0};
  GridPos key{2, 2};
  GridPos door{4, 4};
  int max_steps = 60;
  bool random_start = false;    // randomize agent start each reset
  bool random_layout = false;   // randomize key/door each reset
};

// Deterministic key-and-door gridworld with fixed-template text observations.
class TextGrid {
 public:
  explicit TextGrid(TextGridConfig cfg = {}) : cfg_(cfg) { reset(); }

  static const std::vector<std::string>& actions();

  void reset();
  void reset(std::mt19937_64& rng);

  EnvStep step(const std::string& action);

  std::string description() const;
  std::string state_id() const;

  // Renders the fixed-template description for any state id.
  static std::string describe(const std::string& state_id);

  bool done() const { return done_; }
  int steps_taken() const { return steps_; }
  const TextGridConfig& config() const { return cfg_; }

  // Goal-progress score per action for the state identified by `state_id`;
  // this is what the mock prior provider sharpens into a distribution.
  static std::map<std::string, double> action_scores(const std::string& state_id);

  // Greedy argmax over action_scores; solves the grid from any state.
  static std::string expert_action(const std::string& state_id);

  // Deterministic transition on the underlying MDP (ignores the step cap).
  // Used by the value-iteration oracle.
  static std::pair<std::string, EnvStep> transition(const std::string& state_id,
                                                    const std::string& action);

  static std::string make_state_id(int size, GridPos agent, GridPos key, GridPos door,
                                   bool has_key);

 private:
  TextGridConfig cfg_;
  GridPos agent_;
  GridPos key_;
  GridPos door_;
  bool has_key_ = false;
  bool done_ = false;
  int steps_ = 0;
};

// Optimal Q over every state reachable in a grid layout, by value iteration
// on the underlying MDP.
std::map<std::pair<std::string, std::string>, double> textgrid_q_star(
    int size, GridPos key, GridPos door, double gamma, double tol = 1e-10);

struct PointReachConfig {
  Eigen::Vector2d start{0.1, 0.1};
  Eigen::Vector2d goal{0.8, 0.8};
  double tolerance = 0.05;
  int max_steps = 40;
  double step_scale = 0.2;
  int id_buckets = 10;  // state-id quantization per axis
  bool random_start = false;
};

// Continuous-position environment exercising hybrid (direction, magnitude) actions.
class PointReach {
 public:
  explicit PointReach(PointReachConfig cfg = {}) : cfg_(cfg) { reset(); }

  static const std::vector<std::string>& actions();

  void reset();
  void reset(std::mt19937_64& rng);

  EnvStep step(const HybridAction& action);

  std::string description() const;
  std::string state_id() const;
  const Eigen::Vector2d& position() const { return pos_; }

  bool done() const { return done_; }
  const PointReachConfig& config() const { return cfg_; }

  static std::map<std::string, double> action_scores(const std::string& state_id);

 private:
  PointReachConfig cfg_;
  Eigen::Vector2d pos_;
  bool done_ = false;
  int steps_ = 0;
};

enum class PolicyTag { kRandom, kMedium, kExpert };

struct OfflineDataset {
  std::vector<Transition> transitions;
  PolicyTag behavior = PolicyTag::kRandom;
};

// Collects seeded episodes from TextGrid under the tagged behavior policy.
// Expert is greedy over action scores; medium mixes expert and random 50/50.
OfflineDataset generate_offline(const TextGridConfig& cfg, PolicyTag tag, int episodes,
                                std::uint64_t seed);

std::string dataset_to_jsonl(const OfflineDataset& ds);
OfflineDataset dataset_from_jsonl(const std::string& text);

}  // namespace cachedrl
