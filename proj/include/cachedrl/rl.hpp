#pragma once

#include "cachedrl/meta.hpp"

#include <Eigen/Dense>

#include <deque>
#include <map>
#include <string>
#include <vector>

namespace cachedrl {

// Hybrid action: symbolic component plus an optional continuous vector.
struct HybridAction {
  std::string symbolic;
  Eigen::VectorXd continuous;  // empty in discrete environments
};

struct Transition {
  std::string state_id;
  HybridAction action;
  double reward = 0.0;
  std::string next_state_id;
  bool done = false;
};

// Tabular Q function; unseen (state, action) pairs read as 0.
class QTable {
 public:
  QTable(double gamma = 0.95, double learning_rate = 0.5)
      : gamma_(gamma), learning_rate_(learning_rate) {}

  double value(const std::string& state_id, const std::string& action) const;
  void set(const std::string& state_id, const std::string& action, double v);

  double max_value(const std::string& state_id, const std::vector<std::string>& actions) const;

  // One Q-learning step. Returns the signed TD error.
  double update(const Transition& t, const std::vector<std::string>& actions);

  std::map<std::string, double> values_for(const std::string& state_id,
                                           const std::vector<std::string>& actions) const;

  double gamma() const { return gamma_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double lr) { learning_rate_ = lr; }

  const std::map<std::pair<std::string, std::string>, double>& table() const { return values_; }
  std::map<std::pair<std::string, std::string>, double>& table() { return values_; }

  std::string to_csv() const;

 private:
  std::map<std::pair<std::string, std::string>, double> values_;
  double gamma_;
  double learning_rate_;
};

// Conditional Gaussian over the continuous component, bucketed by state.
// Means move toward observed controls weighted by a one-step advantage.
class GaussianHead {
 public:
  GaussianHead(double sigma = 0.3, double lr_mean = 0.2, double lr_value = 0.2)
      : sigma_(sigma), lr_mean_(lr_mean), lr_value_(lr_value) {}

  double mean(const std::string& bucket, const std::string& action) const;
  double value(const std::string& bucket) const;

  // Advantage-weighted update; throws if the transition has no continuous part.
  void update(const Transition& t, const std::string& bucket, const std::string& next_bucket,
              double gamma);

  double sample(const std::string& bucket, const std::string& action, std::mt19937_64& rng,
                double lo, double hi) const;

  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }

 private:
  std::map<std::pair<std::string, std::string>, double> means_;
  std::map<std::string, double> value_baseline_;
  double sigma_;
  double lr_mean_;
  double lr_value_;
};

// FIFO replay buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return buffer_.size(); }
  const Transition& at(std::size_t i) const { return buffer_[i]; }

  std::vector<Transition> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> buffer_;
};

struct Sample {
  double td_error = 0.0;
  bool hit = false;
  double q_value = 0.0;
};

// Aggregates a batch: mean |td|, hit fraction, population std of Q values.
BatchMetrics batch_metrics(const std::vector<Sample>& recent);

}  // namespace cachedrl
