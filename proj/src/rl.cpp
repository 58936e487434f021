#include "cachedrl/rl.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

double QTable::value(const std::string& state_id, const std::string& action) const {
  auto it = values_.find({state_id, action});
  return it == values_.end() ? 0.0 : it->second;
}

void QTable::set(const std::string& state_id, const std::string& action, double v) {
  values_[{state_id, action}] = v;
}

double QTable::max_value(const std::string& state_id,
                         const std::vector<std::string>& actions) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : actions) best = std::max(best, value(state_id, a));
  return actions.empty() ? 0.0 : best;
}

double QTable::update(const Transition& t, const std::vector<std::string>& actions) {
  double target = t.reward;
  if (!t.done) target += gamma_ * max_value(t.next_state_id, actions);
  double td = target - value(t.state_id, t.action.symbolic);
  values_[{t.state_id, t.action.symbolic}] += learning_rate_ * td;
  return td;
}

std::map<std::string, double> QTable::values_for(const std::string& state_id,
                                                 const std::vector<std::string>& actions) const {
  std::map<std::string, double> out;
  for (const auto& a : actions) out[a] = value(state_id, a);
  return out;
}

std::string QTable::to_csv() const {
  std::ostringstream out;
  out << "state_id,action,value\n";
  for (const auto& [key, v] : values_) {
    out << key.first << "," << key.second << "," << v << "\n";
  }
  return out.str();
}

double GaussianHead::mean(const std::string& bucket, const std::string& action) const {
  auto it = means_.find({bucket, action});
  return it == means_.end() ? 0.5 : it->second;
}

double GaussianHead::value(const std::string& bucket) const {
  auto it = value_baseline_.find(bucket);
  return it == value_baseline_.end() ? 0.0 : it->second;
}

void GaussianHead::update(const Transition& t, const std::string& bucket,
                          const std::string& next_bucket, double gamma) {
  if (t.action.continuous.size() == 0) {
    throw std::invalid_argument("transition has no continuous action component");
  }
  double u = t.action.continuous[0];
  double target = t.reward + (t.done ? 0.0 : gamma * value(next_bucket));
  double advantage = target - value(bucket);
  double m = mean(bucket, t.action.symbolic);
  means_[{bucket, t.action.symbolic}] = m + lr_mean_ * advantage * (u - m);
  value_baseline_[bucket] = value(bucket) + lr_value_ * (target - value(bucket));
}

double GaussianHead::sample(const std::string& bucket, const std::string& action,
                            std::mt19937_64& rng, double lo, double hi) const {
  std::normal_distribution<double> noise(0.0, sigma_);
  double u = mean(bucket, action) + noise(rng);
  return std::min(hi, std::max(lo, u));
}

void ReplayBuffer::push(Transition t) {
  buffer_.push_back(std::move(t));
  while (buffer_.size() > capacity_) buffer_.pop_front();
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<Transition> out;
  if (buffer_.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(buffer_[pick(rng)]);
  return out;
}

BatchMetrics batch_metrics(const std::vector<Sample>& recent) {
  if (recent.empty()) throw std::invalid_argument("batch_metrics on empty batch");
  double n = static_cast<double>(recent.size());
  BatchMetrics m;
  double q_sum = 0.0;
  double hit_count = 0.0;
  for (const Sample& s : recent) {
    m.mean_td_error += std::abs(s.td_error);
    q_sum += s.q_value;
    if (s.hit) hit_count += 1.0;
  }
  m.mean_td_error /= n;
  m.hit_rate = hit_count / n;
  double q_mean = q_sum / n;
  double var = 0.0;
  for (const Sample& s : recent) var += (s.q_value - q_mean) * (s.q_value - q_mean);
  m.policy_variability = std::sqrt(var / n);  // population std
  return m;
}

}  // namespace cachedrl
