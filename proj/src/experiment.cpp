#include "cachedrl/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace cachedrl {

namespace {

CacheParams cache_params_from(const Config& cfg) {
  return {cfg.get_double("cache.k0"), cfg.get_double("cache.delta0"), cfg.get_double("cache.r0")};
}

CacheRanges cache_ranges_from(const Config& cfg) {
  CacheRanges r;
  r.capacity_min = cfg.get_double("cache.k_min");
  r.capacity_max = cfg.get_double("cache.k_max");
  r.threshold_min = cfg.get_double("cache.delta_min");
  r.threshold_max = cfg.get_double("cache.delta_max");
  r.refresh_min = cfg.get_double("cache.r_min");
  r.refresh_max = cfg.get_double("cache.r_max");
  return r;
}

MetaConfig meta_from(const Config& cfg) {
  MetaConfig m;
  m.lambda_capacity = cfg.get_double("meta.lambda_k");
  m.lambda_threshold = cfg.get_double("meta.lambda_delta");
  m.lambda_refresh = cfg.get_double("meta.lambda_r");
  m.eta_capacity = cfg.get_double("meta.eta_k");
  m.eta_threshold = cfg.get_double("meta.eta_delta");
  m.eta_refresh = cfg.get_double("meta.eta_r");
  m.ranges = cache_ranges_from(cfg);
  return m;
}

TemperatureSchedule schedule_from(const Config& cfg) {
  return {cfg.get_double("schedule.base"), cfg.get_double("schedule.decay"),
          cfg.get_double("schedule.floor")};
}

EmbeddingConfig embed_from(const Config& cfg) {
  EmbeddingConfig e;
  e.dim = cfg.get_int("embedding.dim");
  e.seed = static_cast<std::uint64_t>(cfg.get_int("embedding.seed"));
  return e;
}

LatencyModel latency_from(const Config& cfg) {
  return {cfg.get_double("provider.latency.hit_ms"), cfg.get_double("provider.latency.miss_ms")};
}

TextGridConfig grid_from(const Config& cfg) {
  TextGridConfig g;
  g.size = cfg.get_int("env.size");
  g.start = {cfg.get_int("env.start_x"), cfg.get_int("env.start_y")};
  g.key = {cfg.get_int("env.key_x"), cfg.get_int("env.key_y")};
  g.door = {cfg.get_int("env.door_x"), cfg.get_int("env.door_y")};
  g.max_steps = cfg.get_int("env.max_steps");
  g.random_start = cfg.get_bool("env.random_start");
  g.random_layout = cfg.get_bool("env.random_layout");
  return g;
}

SelectOptions options_for(Variant v, const Config& cfg) {
  SelectOptions o;
  o.candidates = cfg.get_int("policy.candidates");
  switch (v) {
    case Variant::kCached:
    case Variant::kStaticCache:
      break;
    case Variant::kUncached:
      o.use_cache = false;
      break;
    case Variant::kNoPrior:
      o.uniform_prior = true;
      break;
    case Variant::kFixedTemperature:
      o.fixed_tau = cfg.get_double("schedule.base");
      break;
  }
  return o;
}

bool uses_cache(Variant v) {
  return v == Variant::kCached || v == Variant::kStaticCache || v == Variant::kFixedTemperature;
}

bool adapts_params(Variant v) {
  return v == Variant::kCached || v == Variant::kFixedTemperature;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

struct Layout {
  int size = 0;
  GridPos key, door;
  bool operator<(const Layout& o) const {
    return std::tie(size, key.x, key.y, door.x, door.y) <
           std::tie(o.size, o.key.x, o.key.y, o.door.x, o.door.y);
  }
};

Layout layout_of(const std::string& state_id) {
  Layout l;
  int ax = 0, ay = 0, hk = 0;
  if (std::sscanf(state_id.c_str(), "g%d|%d,%d|%d,%d|%d,%d|%d", &l.size, &ax, &ay, &l.key.x,
                  &l.key.y, &l.door.x, &l.door.y, &hk) != 8) {
    throw std::invalid_argument("not a grid state id: " + state_id);
  }
  return l;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kCached: return "cached";
    case Variant::kUncached: return "uncached";
    case Variant::kStaticCache: return "static_cache";
    case Variant::kNoPrior: return "no_prior";
    case Variant::kFixedTemperature: return "fixed_temperature";
  }
  return "unknown";
}

RunMetrics run_online(const Config& cfg, Variant variant, std::uint64_t seed) {
  const std::string kind = cfg.get_string("env.kind");
  const int episodes = cfg.get_int("run.episodes");
  const int batch = cfg.get_int("rl.batch");
  const int n_windows = std::max(1, cfg.get_int("decay.windows"));
  const EmbeddingConfig embed_cfg = embed_from(cfg);
  const TemperatureSchedule sched = schedule_from(cfg);
  const LatencyModel latency = latency_from(cfg);
  const MetaConfig meta_cfg = meta_from(cfg);
  const SelectOptions opts = options_for(variant, cfg);

  RunMetrics out;
  out.q = QTable(cfg.get_double("rl.gamma"), cfg.get_double("rl.lr"));
  SemanticCache cache(cache_params_from(cfg));
  HitRateWindow window(static_cast<std::size_t>(cfg.get_int("policy.hit_window")));
  std::mt19937_64 rng(seed);

  const bool grid = kind != "pointreach";
  TextGridConfig grid_cfg = grid_from(cfg);
  TextGrid grid_env(grid_cfg);
  PointReach point_env;
  GaussianHead head;
  const std::vector<std::string>& actions = grid ? TextGrid::actions() : PointReach::actions();
  const double sharpness = cfg.get_double("provider.sharpness");
  MockProvider::ScoreFn scores =
      grid ? MockProvider::ScoreFn(&TextGrid::action_scores)
           : MockProvider::ScoreFn(&PointReach::action_scores);
  MockProvider provider(scores, sharpness, latency);
  MockProvider probe(scores, sharpness, latency);  // prior-error measurement only
  auto reprovide = [&provider](const std::string& sid) { return provider.prior_for(sid); };

  // Online prior adaptation: after each episode the provider's logits take
  // one demonstration-fitting step for the states just visited, so cached
  // entries go stale and the refresh mechanism has real work to do.
  const bool drift = cfg.get_bool("decay.drift") && grid;
  double drift_lr = cfg.get_double("decay.drift_lr");
  const double drift_anneal = cfg.get_double("decay.drift_anneal");
  const double drift_lambda = cfg.get_double("fewshot.lambda_ent");
  auto drift_state = [&](const std::string& sid) {
    const std::string expert = TextGrid::expert_action(sid);
    for (MockProvider* mp : {&provider, &probe}) {
      std::map<std::string, double>& logits = mp->logits_for(sid);
      Eigen::VectorXd z(static_cast<int>(logits.size()));
      int i = 0, target = 0;
      for (const auto& [a, v] : logits) {
        if (a == expert) target = i;
        z[i++] = v;
      }
      z -= drift_lr * adapt_grad(z, target, drift_lambda);
      i = 0;
      for (auto& [a, v] : logits) v = z[i++];
    }
  };

  std::vector<Sample> samples;
  std::map<std::string, std::int64_t> window_visits;
  std::map<std::string, double> fresh_error;  // memoized vs. the probe provider
  Step now = 0;
  int current_window = 0;

  // Visitation-weighted mean prior error of what the cache would serve for
  // the states visited during the closing window.
  auto close_window = [&]() {
    double weighted = 0.0;
    std::int64_t total = 0;
    for (const auto& [sid, count] : window_visits) {
      auto served = cache.peek(embed_text(grid ? TextGrid::describe(sid) : sid, embed_cfg));
      double err = 0.0;
      if (served) {
        if (drift) {  // priors move over time; memoization only valid when static
          err = prior_error(served->prior, probe.prior_for(sid));
        } else {
          std::string key = served->source_state_id + "->" + sid;
          auto it = fresh_error.find(key);
          if (it == fresh_error.end()) {
            it = fresh_error.emplace(key, prior_error(served->prior, probe.prior_for(sid))).first;
          }
          err = it->second;
        }
      }
      weighted += static_cast<double>(count) * err;
      total += count;
    }
    out.kappa_windows.push_back(total > 0 ? weighted / static_cast<double>(total) : 0.0);
    window_visits.clear();
  };

  for (int ep = 0; ep < episodes; ++ep) {
    if (grid) {
      if (grid_cfg.random_start || grid_cfg.random_layout) grid_env.reset(rng);
      else grid_env.reset();
    } else {
      point_env.reset(rng);
    }
    double ep_return = 0.0;
    bool success = false;
    int steps = 0;
    double ep_latency = 0.0;
    std::map<std::string, bool> episode_states;
    const int w = std::min(n_windows - 1, ep * n_windows / std::max(1, episodes));
    if (w != current_window) {
      close_window();
      current_window = w;
    }

    while (grid ? !grid_env.done() : !point_env.done()) {
      const std::string sid = grid ? grid_env.state_id() : point_env.state_id();
      const std::string desc = grid ? grid_env.description() : point_env.description();
      out.visits[sid] += 1;
      window_visits[sid] += 1;
      episode_states[sid] = true;
      std::map<std::string, double> qvals = out.q.values_for(sid, actions);
      ActionTrace trace = select_action(desc, sid, qvals, cache, provider, embed_cfg, sched,
                                        window, opts, now, rng);
      ++now;

      double step_ms = 0.0;
      if (!opts.uniform_prior) {
        step_ms = trace.cache_hit ? latency.hit_cost_ms : latency.miss_cost_ms;
      }
      out.step_latencies_ms.push_back(step_ms);
      ep_latency += step_ms;

      HybridAction action{trace.chosen, {}};
      EnvStep res;
      std::string next_id;
      if (grid) {
        res = grid_env.step(trace.chosen);
        next_id = grid_env.state_id();
      } else {
        Eigen::VectorXd u(1);
        u[0] = head.sample(sid, trace.chosen, rng, 0.0, 1.0);
        action.continuous = u;
        res = point_env.step(action);
        next_id = point_env.state_id();
      }
      Transition t{sid, action, res.reward, next_id, res.done};
      double td = out.q.update(t, actions);
      if (!grid) head.update(t, sid, next_id, out.q.gamma());

      samples.push_back({td, trace.cache_hit, out.q.value(sid, trace.chosen)});
      if (static_cast<int>(samples.size()) >= batch) {
        BatchMetrics m = batch_metrics(samples);
        samples.clear();
        if (adapts_params(variant)) {
          cache.params() = meta_update(cache.params(), m, meta_cfg);
          out.params.push_back({now, cache.params().capacity, cache.params().threshold,
                                cache.params().refresh_rate, m.hit_rate, m.mean_td_error,
                                m.policy_variability});
        }
      }
      if (uses_cache(variant)) {
        std::map<std::string, double> density;
        for (const auto& [s, c] : out.visits) density[s] = static_cast<double>(c);
        out.refreshes += cache.refresh_step(density, reprovide, rng, now);
      }

      ep_return += res.reward;
      success = success || res.success;
      ++steps;
      ++out.total_steps;
    }

    if (drift) {
      for (const auto& [sid, _] : episode_states) drift_state(sid);
      drift_lr *= drift_anneal;  // annealed adaptation: staleness inflow decays
    }
    double mean_ms = steps > 0 ? ep_latency / steps : 0.0;
    out.episodes.push_back({ep, ep_return, success, steps, provider.stats().query_count,
                            cache.hit_rate(), mean_ms});
  }

  out.queries = provider.stats().query_count;
  out.cache_hits = cache.hits();
  out.cache_misses = cache.misses();
  out.hit_rate = cache.hit_rate();
  out.final_params = cache.params();
  out.final_tau = opts.fixed_tau ? *opts.fixed_tau : temperature(window.rate(), sched);
  close_window();

  const int tail = std::min<int>(50, static_cast<int>(out.episodes.size()));
  if (tail > 0) {
    double succ = 0.0, ret = 0.0;
    for (int i = static_cast<int>(out.episodes.size()) - tail;
         i < static_cast<int>(out.episodes.size()); ++i) {
      succ += out.episodes[static_cast<std::size_t>(i)].success ? 1.0 : 0.0;
      ret += out.episodes[static_cast<std::size_t>(i)].episode_return;
    }
    out.success_rate_last50 = succ / tail;
    out.mean_return_last50 = ret / tail;
  }
  return out;
}

LatencySummary latency_report(double hit_rate, const LatencyModel& model,
                              const std::vector<double>& per_step_ms) {
  if (!(hit_rate >= 0.0 && hit_rate <= 1.0)) {
    throw std::invalid_argument("hit rate out of [0,1]");
  }
  LatencySummary s;
  s.hit_rate = hit_rate;
  s.weighted_mean_ms = hit_rate * model.hit_cost_ms + (1.0 - hit_rate) * model.miss_cost_ms;
  if (per_step_ms.empty()) return s;
  std::vector<double> sorted = per_step_ms;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const std::size_t n = sorted.size();
  s.mean_ms = sum / static_cast<double>(n);
  s.median_ms = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.p95_ms = sorted[static_cast<std::size_t>(std::llround(0.95 * static_cast<double>(n - 1)))];
  return s;
}

BoundReport run_bound_experiment(const Config& cfg, const RunMetrics& trained,
                                 std::uint64_t seed) {
  const double sharpness = cfg.get_double("provider.sharpness");
  auto probe = std::make_shared<MockProvider>(MockProvider::ScoreFn(&TextGrid::action_scores),
                                              sharpness);
  const double gamma = cfg.get_double("rl.gamma");
  auto q_star_cache =
      std::make_shared<std::map<Layout, std::map<std::pair<std::string, std::string>, double>>>();

  BoundExperimentInputs in;
  in.visit_counts = trained.visits;
  in.fresh_prior = [probe](const std::string& sid) { return probe->prior_for(sid); };
  const QTable& q = trained.q;
  in.learned_q = [&q](const std::string& sid) { return q.values_for(sid, TextGrid::actions()); };
  in.oracle_q = [q_star_cache, gamma](const std::string& sid) {
    Layout l = layout_of(sid);
    auto it = q_star_cache->find(l);
    if (it == q_star_cache->end()) {
      it = q_star_cache->emplace(l, textgrid_q_star(l.size, l.key, l.door, gamma)).first;
    }
    std::map<std::string, double> out;
    for (const auto& a : TextGrid::actions()) out[a] = it->second.at({sid, a});
    return out;
  };
  in.tau = trained.final_tau;
  in.noise_levels = cfg.get_doubles("bound.noise_levels");
  in.samples_per_level = cfg.get_int("bound.samples_per_level");

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  return bound_experiment(in, rng);
}

FewshotReport run_fewshot(const Config& cfg, std::uint64_t seed) {
  TextGridConfig grid_cfg = grid_from(cfg);
  grid_cfg.random_start = false;
  grid_cfg.random_layout = false;
  MockProvider provider(MockProvider::ScoreFn(&TextGrid::action_scores), 0.0);

  AdaptationSet set;
  set.lambda_ent = cfg.get_double("fewshot.lambda_ent");
  const int shots = cfg.get_int("fewshot.shots");
  TextGrid env(grid_cfg);
  env.reset();
  std::map<std::string, bool> seen;
  while (!env.done() && static_cast<int>(set.demos.size()) < shots) {
    std::string sid = env.state_id();
    std::string a = TextGrid::expert_action(sid);
    if (!seen[sid]) {
      seen[sid] = true;
      set.demos.push_back({sid, a});
    }
    env.step(a);
  }

  auto cross_entropy = [&provider, &set]() {
    double ce = 0.0;
    for (const auto& d : set.demos) {
      ce += -std::log(std::max(1e-12, provider.prior_for(d.state_id).prob(d.expert_action)));
    }
    return ce / static_cast<double>(set.demos.size());
  };
  auto greedy_success = [&provider, &grid_cfg]() {
    TextGrid rollout(grid_cfg);
    rollout.reset();
    bool success = false;
    while (!rollout.done()) {
      PriorDistribution p = provider.prior_for(rollout.state_id());
      std::string best;
      double best_p = -1.0;
      for (const auto& [a, prob] : p.probs()) {
        if (prob > best_p) {
          best_p = prob;
          best = a;
        }
      }
      success = success || rollout.step(best).success;
    }
    return success ? 1.0 : 0.0;
  };

  FewshotReport rep;
  rep.demos = static_cast<int>(set.demos.size());
  rep.ce_before = cross_entropy();
  rep.success_before = greedy_success();
  adapt_prior(provider, set, cfg.get_int("fewshot.steps"), cfg.get_double("fewshot.lr"));
  rep.ce_after = cross_entropy();
  rep.success_after = greedy_success();
  (void)seed;
  return rep;
}

namespace {

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ",";
    row += c;
  }
  return row + "\n";
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

}  // namespace

int run_suite(const Config& cfg, const std::vector<std::string>& suites,
              const std::string& out_dir, const std::vector<std::uint64_t>& seeds) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::map<std::string, std::string> outputs;
  bool failed = false;
  std::vector<std::string> notes;

  auto want = [&suites](const std::string& s) {
    return std::find(suites.begin(), suites.end(), s) != suites.end();
  };

  if (want("online")) {
    std::string metrics =
        "seed,variant,episode,return,success,steps,queries_cum,hit_rate,mean_step_latency_ms\n";
    std::string params =
        "seed,step,capacity,threshold,refresh_rate,hit_rate,mean_td_error,policy_variability\n";
    std::string decay = "seed,window,kappa\n";
    std::string summary =
        "seed,cached_queries,uncached_queries,query_ratio,cached_success_last50,"
        "uncached_success_last50,hit_rate,beta_hat\n";
    for (std::uint64_t seed : seeds) {
      RunMetrics cached = run_online(cfg, Variant::kCached, seed);
      RunMetrics uncached = run_online(cfg, Variant::kUncached, seed);
      for (const Variant v : {Variant::kCached, Variant::kUncached}) {
        const RunMetrics& m = v == Variant::kCached ? cached : uncached;
        for (const auto& e : m.episodes) {
          metrics += csv_row({std::to_string(seed), variant_name(v), std::to_string(e.episode),
                              num(e.episode_return), std::to_string(e.success ? 1 : 0),
                              std::to_string(e.steps), std::to_string(e.queries_cum),
                              num(e.hit_rate), num(e.mean_step_latency_ms)});
        }
      }
      for (const auto& p : cached.params) {
        params += csv_row({std::to_string(seed), std::to_string(p.step), num(p.capacity),
                           num(p.threshold), num(p.refresh_rate), num(p.hit_rate),
                           num(p.mean_td_error), num(p.policy_variability)});
      }
      for (std::size_t w = 0; w < cached.kappa_windows.size(); ++w) {
        decay += csv_row({std::to_string(seed), std::to_string(w), num(cached.kappa_windows[w])});
      }
      if (cached.queries != cached.cache_misses + cached.refreshes) {
        failed = true;
        notes.push_back("query accounting violated for seed " + std::to_string(seed));
      }
      DecayCheck dc = corollary_decay_check(cached.kappa_windows);
      double ratio = static_cast<double>(cached.queries) /
                     static_cast<double>(std::max<std::int64_t>(1, uncached.queries));
      summary += csv_row({std::to_string(seed), std::to_string(cached.queries),
                          std::to_string(uncached.queries), num(ratio),
                          num(cached.success_rate_last50), num(uncached.success_rate_last50),
                          num(cached.hit_rate), num(dc.beta_hat)});
    }
    outputs["metrics.csv"] = metrics;
    outputs["params.csv"] = params;
    outputs["decay.csv"] = decay;
    outputs["summary.csv"] = summary;
  }

  if (want("ablation")) {
    std::string ablation =
        "variant,seed,mean_return_last50,success_last50,hit_rate,queries,total_steps,"
        "weighted_latency_ms\n";
    const LatencyModel lat = latency_from(cfg);
    for (const Variant v : {Variant::kCached, Variant::kUncached, Variant::kStaticCache,
                            Variant::kNoPrior, Variant::kFixedTemperature}) {
      for (std::uint64_t seed : seeds) {
        RunMetrics m = run_online(cfg, v, seed);
        double h = v == Variant::kUncached || v == Variant::kNoPrior ? 0.0 : m.hit_rate;
        double weighted = v == Variant::kNoPrior
                              ? 0.0
                              : latency_report(h, lat, m.step_latencies_ms).weighted_mean_ms;
        ablation += csv_row({variant_name(v), std::to_string(seed), num(m.mean_return_last50),
                             num(m.success_rate_last50), num(m.hit_rate),
                             std::to_string(m.queries), std::to_string(m.total_steps),
                             num(weighted)});
      }
    }
    outputs["ablation.csv"] = ablation;
  }

  if (want("bound")) {
    Config bound_cfg = cfg;
    bound_cfg.set("run.episodes", std::to_string(cfg.get_int("bound.train_episodes")));
    RunMetrics trained = run_online(bound_cfg, Variant::kCached, seeds.front());
    BoundReport report = run_bound_experiment(bound_cfg, trained, seeds.front());
    outputs["bound.csv"] = report.to_csv();
    if (report.violations > 0) {
      failed = true;
      notes.push_back("divergence bound violated " + std::to_string(report.violations) +
                      " times");
    }
  }

  if (want("latency")) {
    const LatencyModel lat = latency_from(cfg);
    std::string latency = "variant,hit_rate,weighted_mean_ms,mean_ms,median_ms,p95_ms\n";
    for (const Variant v : {Variant::kCached, Variant::kUncached}) {
      RunMetrics m = run_online(cfg, v, seeds.front());
      double h = v == Variant::kUncached ? 0.0 : m.hit_rate;
      LatencySummary s = latency_report(h, lat, m.step_latencies_ms);
      latency += csv_row({variant_name(v), num(s.hit_rate), num(s.weighted_mean_ms),
                          num(s.mean_ms), num(s.median_ms), num(s.p95_ms)});
    }
    outputs["latency.csv"] = latency;
  }

  if (want("offline")) {
    std::string offline =
        "seed,method,final_performance,epochs_to_converge,query_ratio,provider_queries\n";
    const TextGridConfig env_cfg = grid_from(cfg);
    const std::string policy = cfg.get_string("offline.policy");
    const PolicyTag tag = policy == "expert"   ? PolicyTag::kExpert
                          : policy == "random" ? PolicyTag::kRandom
                                               : PolicyTag::kMedium;
    for (std::uint64_t seed : seeds) {
      OfflineDataset ds = generate_offline(env_cfg, tag, cfg.get_int("offline.episodes"), seed);
      for (const PriorSource src : {PriorSource::kNone, PriorSource::kUncached,
                                    PriorSource::kStaticCache, PriorSource::kAdaptiveCache}) {
        OfflineTrainInputs in;
        in.dataset = ds;
        in.env_cfg = env_cfg;
        in.cfg.alpha_cql = cfg.get_double("offline.alpha");
        in.cfg.beta_prior = src == PriorSource::kNone ? 0.0 : cfg.get_double("offline.beta");
        in.cfg.epochs = cfg.get_int("offline.epochs");
        in.cfg.convergence_window = cfg.get_int("offline.convergence_window");
        in.cfg.lr = cfg.get_double("offline.lr");
        in.cfg.gamma = cfg.get_double("rl.gamma");
        in.cfg.batch_size = cfg.get_int("rl.batch");
        in.cfg.eval_every = cfg.get_int("offline.eval_every");
        in.cfg.eval_episodes = cfg.get_int("offline.eval_episodes");
        in.source = src;
        in.provider_sharpness = cfg.get_double("provider.sharpness");
        in.embed_cfg = embed_from(cfg);
        in.cache_params = cache_params_from(cfg);
        in.meta_cfg = meta_from(cfg);
        const double scale = cfg.get_double("offline.meta_eta_scale");
        in.meta_cfg.eta_capacity *= scale;
        in.meta_cfg.eta_threshold *= scale;
        in.meta_cfg.eta_refresh *= scale;
        in.seed = seed;
        OfflineResult res = train_offline(in);
        const std::string method = src == PriorSource::kNone          ? "cql"
                                   : src == PriorSource::kUncached    ? "cql_prior_uncached"
                                   : src == PriorSource::kStaticCache ? "cql_prior_static"
                                                                      : "cql_prior_adaptive";
        offline += csv_row({std::to_string(seed), method, num(res.final_performance),
                            std::to_string(res.epochs_to_converge), num(res.query_ratio),
                            std::to_string(res.provider_queries)});
      }
    }
    outputs["offline.csv"] = offline;
  }

  if (want("fewshot")) {
    FewshotReport rep = run_fewshot(cfg, seeds.front());
    std::string fewshot = "demos,ce_before,ce_after,success_before,success_after\n";
    fewshot += csv_row({std::to_string(rep.demos), num(rep.ce_before), num(rep.ce_after),
                        num(rep.success_before), num(rep.success_after)});
    outputs["fewshot.csv"] = fewshot;
  }

  nlohmann::json manifest;
  manifest["config_hash"] = hex64(fnv1a(cfg.canonical()));
  manifest["seeds"] = seeds;
  manifest["suites"] = suites;
  manifest["failed"] = failed;
  manifest["notes"] = notes;
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& [name, content] : outputs) hashes[name] = hex64(fnv1a(content));
  manifest["outputs"] = hashes;
  outputs["manifest.json"] = manifest.dump(2) + "\n";

  for (const auto& [name, content] : outputs) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    f << content;
  }
  return failed ? 1 : 0;
}

}  // namespace cachedrl
