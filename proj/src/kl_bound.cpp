#include "cachedrl/kl_bound.hpp"

#include "cachedrl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

namespace {
constexpr double kFloor = 1e-12;
}

double prior_error(const PriorDistribution& cached, const PriorDistribution& fresh) {
  std::vector<std::string> support;
  for (const auto& [a, _] : cached.probs()) support.push_back(a);
  for (const auto& [a, _] : fresh.probs()) support.push_back(a);
  PriorDistribution c = floored(cached, support, kFloor);
  PriorDistribution f = floored(fresh, support, kFloor);
  double err = 0.0;
  for (const auto& [a, p] : c.probs()) {
    err = std::max(err, std::abs(std::log(p) - std::log(f.prob(a))));
  }
  return err;
}

double q_error(const std::map<std::string, double>& q,
               const std::map<std::string, double>& q_star) {
  if (q.size() != q_star.size()) throw std::invalid_argument("mismatched action sets");
  double err = 0.0;
  for (const auto& [a, v] : q) {
    auto it = q_star.find(a);
    if (it == q_star.end()) throw std::invalid_argument("action missing from oracle: " + a);
    err = std::max(err, std::abs(v - it->second));
  }
  return err;
}

double theorem1_bound(const BoundInputs& b) {
  if (!(b.tau > 0.0)) throw std::invalid_argument("temperature must be positive");
  double x = b.kappa + b.epsilon / b.tau;
  double factor = x < 1e-12 ? 1.0 : x / (1.0 - std::exp(-x));
  return factor * (1.0 + b.rho);
}

double measured_kl(const PriorDistribution& cached_posterior,
                   const PriorDistribution& exact_posterior) {
  return kl_divergence(cached_posterior, exact_posterior, kFloor);
}

PriorDistribution perturb_log_prior(const PriorDistribution& prior, double sigma,
                                    std::mt19937_64& rng) {
  if (sigma == 0.0) return prior;
  std::normal_distribution<double> noise(0.0, sigma);
  std::map<std::string, double> weights;
  for (const auto& [a, p] : prior.probs()) {
    weights[a] = std::exp(std::log(std::max(p, kFloor)) + noise(rng));
  }
  return PriorDistribution::normalized(weights);
}

std::string BoundReport::to_csv() const {
  std::ostringstream out;
  out << "noise_level,state_id,kappa,epsilon,rho,tau,measured_kl,bound,violated\n";
  for (const BoundSample& r : rows) {
    out << r.noise_level << ",\"" << r.state_id << "\"," << r.kappa << "," << r.epsilon << ","
        << r.rho << "," << r.tau << "," << r.kl << "," << r.bound << "," << (r.violated ? 1 : 0)
        << "\n";
  }
  return out.str();
}

BoundReport bound_experiment(const BoundExperimentInputs& in, std::mt19937_64& rng) {
  if (in.visit_counts.empty()) throw std::invalid_argument("no visited states");
  std::vector<std::string> states;
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& [s, n] : in.visit_counts) {
    states.push_back(s);
    weights.push_back(static_cast<double>(n));
    total += static_cast<double>(n);
  }
  double mean_mu = 1.0 / static_cast<double>(states.size());  // mean of mu over visited states
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  BoundReport report;
  for (double sigma : in.noise_levels) {
    double kl_sum = 0.0;
    for (int i = 0; i < in.samples_per_level; ++i) {
      std::size_t idx = pick(rng);
      const std::string& s = states[idx];
      PriorDistribution fresh = in.fresh_prior(s);
      PriorDistribution cached = perturb_log_prior(fresh, sigma, rng);
      std::map<std::string, double> q = in.learned_q(s);
      std::map<std::string, double> q_star = in.oracle_q(s);

      BoundSample row;
      row.noise_level = sigma;
      row.state_id = s;
      row.kappa = prior_error(cached, fresh);
      row.epsilon = q_error(q, q_star);
      row.rho = (weights[idx] / total) / mean_mu;
      row.tau = in.tau;
      row.kl = measured_kl(posterior_weights(cached, q, in.tau),
                           posterior_weights(fresh, q_star, in.tau));
      row.bound = theorem1_bound({row.kappa, row.epsilon, row.tau, row.rho});
      row.violated = row.kl > row.bound;
      if (row.violated) ++report.violations;
      kl_sum += row.kl;
      report.rows.push_back(std::move(row));
    }
    report.mean_kl_by_level[sigma] = kl_sum / static_cast<double>(in.samples_per_level);
  }
  return report;
}

DecayCheck corollary_decay_check(const std::vector<double>& window_errors) {
  if (window_errors.size() < 3) throw std::invalid_argument("need at least 3 windows");
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < window_errors.size(); ++i) {
    ratios.push_back(window_errors[i + 1] / std::max(window_errors[i], kFloor));
  }
  std::sort(ratios.begin(), ratios.end());
  std::size_t n = ratios.size();
  double beta = n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  return DecayCheck{beta, beta < 1.0};
}

}  // namespace cachedrl
