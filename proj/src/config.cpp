#include "cachedrl/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"embedding.dim", "64"},
      {"embedding.seed", "0"},

      {"cache.k0", "500"},
      {"cache.delta0", "0.8"},
      {"cache.r0", "0.1"},
      {"cache.k_min", "100"},
      {"cache.k_max", "1000"},
      {"cache.delta_min", "0.5"},
      {"cache.delta_max", "0.99"},
      {"cache.r_min", "0.01"},
      {"cache.r_max", "0.2"},

      {"meta.lambda_k", "0.05"},
      {"meta.lambda_delta", "0.1"},
      {"meta.lambda_r", "0.02"},
      {"meta.eta_k", "1e-3"},
      {"meta.eta_delta", "5e-4"},
      {"meta.eta_r", "1e-4"},

      {"schedule.base", "0.8"},
      {"schedule.decay", "2.0"},
      {"schedule.floor", "0.1"},

      {"policy.candidates", "5"},
      {"policy.hit_window", "500"},

      {"provider.kind", "mock"},
      {"provider.sharpness", "2.0"},
      {"provider.latency.hit_ms", "18.7"},
      {"provider.latency.miss_ms", "349"},
      {"provider.remote.url", "http://localhost:8787"},
      {"provider.remote.timeout_ms", "5000"},
      {"provider.remote.fallback", "abort"},

      {"env.kind", "textgrid"},
      {"env.size", "5"},
      {"env.max_steps", "60"},
      {"env.start_x", "0"},
      {"env.start_y", "0"},
      {"env.key_x", "2"},
      {"env.key_y", "2"},
      {"env.door_x", "4"},
      {"env.door_y", "4"},
      {"env.random_start", "true"},
      {"env.random_layout", "false"},

      {"rl.gamma", "0.95"},
      {"rl.lr", "0.5"},
      {"rl.batch", "64"},
      {"rl.replay_capacity", "10000"},

      {"run.episodes", "200"},
      {"run.seeds", "1,2,3,4,5"},

      {"offline.episodes", "200"},
      {"offline.policy", "random"},
      {"offline.epochs", "60"},
      {"offline.alpha", "0.05"},
      {"offline.beta", "0.005"},
      {"offline.lr", "0.2"},
      {"offline.eval_every", "10"},
      {"offline.eval_episodes", "20"},
      {"offline.convergence_window", "50"},
      {"offline.meta_eta_scale", "500"},

      {"bound.samples_per_level", "500"},
      {"bound.noise_levels", "0,0.1,0.2,0.4"},
      {"bound.train_episodes", "150"},

      {"fewshot.shots", "5"},
      {"fewshot.lambda_ent", "0.01"},
      {"fewshot.steps", "2000"},
      {"fewshot.lr", "0.1"},

      {"decay.windows", "6"},
      {"decay.drift", "false"},
      {"decay.drift_lr", "0.05"},
      {"decay.drift_anneal", "0.99"},
  };
  return kDefaults;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() : values_(defaults()) {}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> errors;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (!defaults().count(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    cfg.values_[key] = value;
  }
  if (!errors.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(raw(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + " is not a number: " + raw(key));
  }
}

int Config::get_int(const std::string& key) const {
  try {
    return std::stoi(raw(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key " + key + " is not an integer: " + raw(key));
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key " + key + " is not a boolean: " + v);
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(raw(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument("config key " + key + " has no values");
  return out;
}

std::vector<std::uint64_t> Config::get_seeds(const std::string& key) const {
  std::vector<std::uint64_t> out;
  std::istringstream in(raw(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(std::stoull(trim(item)));
  }
  if (out.empty()) throw std::invalid_argument("config key " + key + " lists no seeds");
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw std::invalid_argument("unknown config key: " + key);
  values_[key] = value;
}

std::string Config::canonical() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
  return out.str();
}

}  // namespace cachedrl
