#include "cachedrl/env.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

namespace {

constexpr double kStepPenalty = -0.01;

struct GridState {
  int size;
  GridPos agent, key, door;
  bool has_key;
};

GridState parse_grid_id(const std::string& id) {
  GridState s;
  int hk = 0;
  if (std::sscanf(id.c_str(), "g%d|%d,%d|%d,%d|%d,%d|%d", &s.size, &s.agent.x, &s.agent.y,
                  &s.key.x, &s.key.y, &s.door.x, &s.door.y, &hk) != 8) {
    throw std::invalid_argument("bad TextGrid state id: " + id);
  }
  s.has_key = hk != 0;
  return s;
}

int manhattan(GridPos a, GridPos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

GridPos moved(GridPos p, const std::string& dir, int size) {
  GridPos q = p;
  if (dir == "north") q.y += 1;
  else if (dir == "south") q.y -= 1;
  else if (dir == "east") q.x += 1;
  else if (dir == "west") q.x -= 1;
  q.x = std::clamp(q.x, 0, size - 1);
  q.y = std::clamp(q.y, 0, size - 1);
  return q;
}

}  // namespace

const std::vector<std::string>& TextGrid::actions() {
  static const std::vector<std::string> kActions = {"north", "south", "east",
                                                    "west",  "pickup", "open"};
  return kActions;
}

std::string TextGrid::make_state_id(int size, GridPos agent, GridPos key, GridPos door,
                                    bool has_key) {
  std::ostringstream out;
  out << "g" << size << "|" << agent.x << "," << agent.y << "|" << key.x << "," << key.y << "|"
      << door.x << "," << door.y << "|" << (has_key ? 1 : 0);
  return out.str();
}

void TextGrid::reset() {
  agent_ = cfg_.start;
  key_ = cfg_.key;
  door_ = cfg_.door;
  has_key_ = false;
  done_ = false;
  steps_ = 0;
}

void TextGrid::reset(std::mt19937_64& rng) {
  reset();
  std::uniform_int_distribution<int> coord(0, cfg_.size - 1);
  if (cfg_.random_layout) {
    key_ = {coord(rng), coord(rng)};
    do {
      door_ = {coord(rng), coord(rng)};
    } while (door_ == key_);
  }
  if (cfg_.random_start) {
    do {
      agent_ = {coord(rng), coord(rng)};
    } while (agent_ == door_);
  }
}

std::pair<std::string, EnvStep> TextGrid::transition(const std::string& state_id,
                                                     const std::string& action) {
  GridState s = parse_grid_id(state_id);
  EnvStep result;
  result.reward = kStepPenalty;
  if (action == "pickup") {
    if (!s.has_key && s.agent == s.key) s.has_key = true;
  } else if (action == "open") {
    if (s.has_key && s.agent == s.door) {
      result.reward = 1.0;
      result.done = true;
      result.success = true;
    }
  } else if (action == "north" || action == "south" || action == "east" || action == "west") {
    s.agent = moved(s.agent, action, s.size);
  } else {
    throw std::invalid_argument("unknown TextGrid action: " + action);
  }
  return {make_state_id(s.size, s.agent, s.key, s.door, s.has_key), result};
}

EnvStep TextGrid::step(const std::string& action) {
  if (done_) throw std::logic_error("step on finished episode");
  auto [next_id, result] = transition(state_id(), action);
  GridState s = parse_grid_id(next_id);
  agent_ = s.agent;
  has_key_ = s.has_key;
  ++steps_;
  if (!result.done && steps_ >= cfg_.max_steps) result.done = true;
  done_ = result.done;
  return result;
}

std::string TextGrid::description() const { return describe(state_id()); }

std::string TextGrid::describe(const std::string& state_id) {
  GridState s = parse_grid_id(state_id);
  std::ostringstream out;
  out << "You are at (" << s.agent.x << "," << s.agent.y << "). Key at (" << s.key.x << ","
      << s.key.y << "). Door at (" << s.door.x << "," << s.door.y << "). Carrying: "
      << (s.has_key ? "yes" : "no") << ".";
  return out.str();
}

std::string TextGrid::state_id() const {
  return make_state_id(cfg_.size, agent_, key_, door_, has_key_);
}

std::map<std::string, double> TextGrid::action_scores(const std::string& state_id) {
  GridState s = parse_grid_id(state_id);
  GridPos subgoal = s.has_key ? s.door : s.key;
  int dist = manhattan(s.agent, subgoal);
  std::map<std::string, double> scores;
  for (const char* dir : {"north", "south", "east", "west"}) {
    GridPos next = moved(s.agent, dir, s.size);
    scores[dir] = static_cast<double>(dist - manhattan(next, subgoal));
  }
  scores["pickup"] = (!s.has_key && s.agent == s.key) ? 2.0 : -1.0;
  scores["open"] = (s.has_key && s.agent == s.door) ? 2.0 : -1.0;
  return scores;
}

std::string TextGrid::expert_action(const std::string& state_id) {
  std::map<std::string, double> scores = action_scores(state_id);
  std::string best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& a : actions()) {
    double sc = scores.at(a);
    if (sc > best_score) {
      best_score = sc;
      best = a;
    }
  }
  return best;
}

std::map<std::pair<std::string, std::string>, double> textgrid_q_star(int size, GridPos key,
                                                                      GridPos door, double gamma,
                                                                      double tol) {
  std::vector<std::string> states;
  for (int hk = 0; hk <= 1; ++hk) {
    for (int x = 0; x < size; ++x) {
      for (int y = 0; y < size; ++y) {
        states.push_back(TextGrid::make_state_id(size, {x, y}, key, door, hk != 0));
      }
    }
  }
  std::map<std::pair<std::string, std::string>, double> q;
  double delta = tol + 1.0;
  while (delta > tol) {
    delta = 0.0;
    for (const auto& s : states) {
      for (const auto& a : TextGrid::actions()) {
        auto [next, r] = TextGrid::transition(s, a);
        double target = r.reward;
        if (!r.done) {
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& a2 : TextGrid::actions()) best = std::max(best, q[{next, a2}]);
          target += gamma * best;
        }
        delta = std::max(delta, std::abs(target - q[{s, a}]));
        q[{s, a}] = target;
      }
    }
  }
  return q;
}

const std::vector<std::string>& PointReach::actions() {
  static const std::vector<std::string> kActions = {"north", "south", "east", "west"};
  return kActions;
}

void PointReach::reset() {
  pos_ = cfg_.start;
  done_ = false;
  steps_ = 0;
}

void PointReach::reset(std::mt19937_64& rng) {
  reset();
  if (cfg_.random_start) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    pos_ = {unif(rng), unif(rng)};
  }
}

EnvStep PointReach::step(const HybridAction& action) {
  if (done_) throw std::logic_error("step on finished episode");
  if (action.continuous.size() != 1) throw std::invalid_argument("expected scalar control");
  double u = action.continuous[0];
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("control magnitude out of [0,1]");
  Eigen::Vector2d dir;
  if (action.symbolic == "north") dir = {0.0, 1.0};
  else if (action.symbolic == "south") dir = {0.0, -1.0};
  else if (action.symbolic == "east") dir = {1.0, 0.0};
  else if (action.symbolic == "west") dir = {-1.0, 0.0};
  else throw std::invalid_argument("unknown PointReach action: " + action.symbolic);

  pos_ += cfg_.step_scale * u * dir;
  pos_.x() = std::clamp(pos_.x(), 0.0, 1.0);
  pos_.y() = std::clamp(pos_.y(), 0.0, 1.0);
  ++steps_;

  EnvStep result;
  double dist = (pos_ - cfg_.goal).norm();
  result.reward = -dist;
  if (dist < cfg_.tolerance) {
    result.reward += 1.0;
    result.done = true;
    result.success = true;
  } else if (steps_ >= cfg_.max_steps) {
    result.done = true;
  }
  done_ = result.done;
  return result;
}

std::string PointReach::description() const {
  std::ostringstream out;
  out << "Agent near " << state_id();
  return out.str();
}

std::string PointReach::state_id() const {
  int b = cfg_.id_buckets;
  auto bucket = [&](double v) { return std::min(b - 1, static_cast<int>(v * b)); };
  std::ostringstream out;
  out << "p" << b << "|" << bucket(pos_.x()) << "," << bucket(pos_.y()) << "|"
      << bucket(cfg_.goal.x()) << "," << bucket(cfg_.goal.y());
  return out.str();
}

std::map<std::string, double> PointReach::action_scores(const std::string& state_id) {
  int b = 0, ax = 0, ay = 0, gx = 0, gy = 0;
  if (std::sscanf(state_id.c_str(), "p%d|%d,%d|%d,%d", &b, &ax, &ay, &gx, &gy) != 5) {
    throw std::invalid_argument("bad PointReach state id: " + state_id);
  }
  auto center = [&](int i) { return (i + 0.5) / b; };
  Eigen::Vector2d pos{center(ax), center(ay)};
  Eigen::Vector2d goal{center(gx), center(gy)};
  std::map<std::string, double> scores;
  const std::map<std::string, Eigen::Vector2d> dirs = {
      {"north", {0.0, 1.0}}, {"south", {0.0, -1.0}}, {"east", {1.0, 0.0}}, {"west", {-1.0, 0.0}}};
  double dist = (pos - goal).norm();
  for (const auto& [name, d] : dirs) {
    Eigen::Vector2d next = pos + 0.2 * d;
    next.x() = std::clamp(next.x(), 0.0, 1.0);
    next.y() = std::clamp(next.y(), 0.0, 1.0);
    scores[name] = dist - (next - goal).norm();
  }
  return scores;
}

OfflineDataset generate_offline(const TextGridConfig& cfg, PolicyTag tag, int episodes,
                                std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("need at least one episode");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, TextGrid::actions().size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  OfflineDataset ds;
  ds.behavior = tag;
  TextGrid env(cfg);
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(rng);
    while (!env.done()) {
      std::string s = env.state_id();
      std::string a;
      bool use_expert = tag == PolicyTag::kExpert || (tag == PolicyTag::kMedium && unif(rng) < 0.5);
      if (use_expert) {
        a = TextGrid::expert_action(s);
      } else {
        a = TextGrid::actions()[pick(rng)];
      }
      EnvStep r = env.step(a);
      ds.transitions.push_back(Transition{s, HybridAction{a, {}}, r.reward, env.state_id(), r.done});
    }
  }
  return ds;
}

std::string dataset_to_jsonl(const OfflineDataset& ds) {
  std::ostringstream out;
  for (const Transition& t : ds.transitions) {
    nlohmann::json j;
    j["s"] = t.state_id;
    j["a"] = t.action.symbolic;
    j["r"] = t.reward;
    j["s2"] = t.next_state_id;
    j["done"] = t.done;
    out << j.dump() << "\n";
  }
  return out.str();
}

OfflineDataset dataset_from_jsonl(const std::string& text) {
  OfflineDataset ds;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ds.transitions.push_back(Transition{j.at("s"), HybridAction{j.at("a"), {}}, j.at("r"),
                                        j.at("s2"), j.at("done")});
  }
  if (ds.transitions.empty()) throw std::invalid_argument("empty offline dataset");
  return ds;
}

}  // namespace cachedrl
