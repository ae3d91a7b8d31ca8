#include "coopriv/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "coopriv/error.hpp"
#include "coopriv/format.hpp"
#include "coopriv/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coopriv {

std::vector<Scenario> generate_suite(const SuiteSpec& spec) {
  if (spec.scenes < 1) throw InvalidParameter("suite.scenes must be >= 1");
  if (spec.layouts.empty()) throw InvalidParameter("suite.layouts must not be empty");
  std::vector<Scenario> scenes;
  scenes.reserve(static_cast<std::size_t>(spec.scenes));
  for (int i = 0; i < spec.scenes; ++i) {
    const auto layout = spec.layouts[static_cast<std::size_t>(i) % spec.layouts.size()];
    scenes.push_back(generate_scenario(layout, spec.vehicles, spec.duration, spec.dt,
                                       derive_seed(spec.seed, static_cast<std::uint64_t>(i))));
  }
  return scenes;
}

void SweepConfig::validate() const {
  if (rollouts_per_scene < 1) throw InvalidParameter("rollouts_per_scene must be >= 1");
  if (values.empty()) throw InvalidParameter("sweep values must not be empty");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("sweep values must be finite and >= 0");
  if (!(walk_step_fraction >= 0.0)) throw InvalidParameter("walk_step_fraction must be >= 0");
  pseudonyms.validate();
}

ObfuscationPolicy sweep_policy(const SweepConfig& config, double value, std::uint64_t seed) {
  switch (config.policy) {
    case PolicyKind::none: return ObfuscationPolicy{PolicyKind::none, 0, 0, 0, 0, seed};
    case PolicyKind::gaussian: return ObfuscationPolicy::gaussian(value, seed);
    case PolicyKind::fixed_offset: return ObfuscationPolicy::fixed_offset(value, seed);
    case PolicyKind::smoothed_random_walk:
      return ObfuscationPolicy::smoothed_random_walk(value * config.walk_step_fraction, value, seed);
  }
  return {};
}

RolloutOutcome run_rollout(const SweepConfig& config, const Scenario& scene, std::size_t scene_index,
                           std::size_t rollout, double value) {
  const std::uint64_t rollout_seed = derive_seed(config.seed, scene_index, rollout, 0x7011ULL);
  SplitMix64 rng(rollout_seed);
  std::uniform_int_distribution<std::size_t> pick(0, scene.trajectories.size() - 1);

  Scenario rollout_scene;
  rollout_scene.scenario_id = scene.scenario_id;
  rollout_scene.duration = scene.duration;
  rollout_scene.dt = scene.dt;
  rollout_scene.trajectories = scene.trajectories;
  rollout_scene.rng_seed = scene.rng_seed;
  rollout_scene.ego_id = scene.trajectories[pick(rng)].vehicle_id;

  PseudonymPolicy pseudonyms = config.pseudonyms;
  pseudonyms.seed = derive_seed(rollout_seed, 0x95e0ULL);
  const auto policy = sweep_policy(config, value, derive_seed(rollout_seed, 0xf0f9ULL));
  const auto streams = emit_shared_stream(rollout_scene, policy, pseudonyms, config.stream);
  try {
    const auto result = evaluate_privacy(rollout_scene, streams, config.privacy);
    return {false, result.confusion_rate, result.rmse, result.rmse_matched};
  } catch (const DegenerateScenario&) {
    return {true, 0.0, 0.0, 0.0};
  }
}

namespace {

struct Moments {
  double mean{0.0};
  double sd{0.0};
};

Moments moments(const std::vector<double>& xs) {
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

SweepResult reduce_outcomes(const SweepConfig& config, const std::vector<RolloutOutcome>& outcomes) {
  const auto per_value = config.scene_count() * static_cast<std::size_t>(config.rollouts_per_scene);
  SweepResult result;
  result.rollouts_executed = outcomes.size();
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    std::vector<double> confusion, rmse, rmse_matched;
    SweepRow row;
    row.value = config.values[v];
    for (std::size_t i = 0; i < per_value; ++i) {
      const auto& o = outcomes[v * per_value + i];
      if (o.skipped) {
        ++row.skipped;
        continue;
      }
      confusion.push_back(o.confusion);
      rmse.push_back(o.rmse);
      if (std::isfinite(o.rmse_matched)) rmse_matched.push_back(o.rmse_matched);
    }
    row.n_rollouts = confusion.size();
    const auto c = moments(confusion);
    const auto r = moments(rmse);
    const auto m = moments(rmse_matched);
    row.mean_confusion = c.mean;
    row.sd_confusion = c.sd;
    row.mean_rmse = r.mean;
    row.sd_rmse = r.sd;
    row.mean_rmse_matched = m.mean;
    row.sd_rmse_matched = m.sd;
    result.rows.push_back(row);
  }
  return result;
}

SweepResult run_sweep_serial(const SweepConfig& config) {
  config.validate();
  const auto scenes = config.custom_scenes.empty() ? generate_suite(config.suite) : config.custom_scenes;
  const auto rollouts = static_cast<std::size_t>(config.rollouts_per_scene);
  std::vector<RolloutOutcome> outcomes;
  outcomes.reserve(config.values.size() * scenes.size() * rollouts);
  for (double value : config.values)
    for (std::size_t s = 0; s < scenes.size(); ++s)
      for (std::size_t r = 0; r < rollouts; ++r) outcomes.push_back(run_rollout(config, scenes[s], s, r, value));
  return reduce_outcomes(config, outcomes);
}

SweepResult run_sweep(const SweepConfig& config, int threads) {
  config.validate();
  const auto scenes = config.custom_scenes.empty() ? generate_suite(config.suite) : config.custom_scenes;
  const auto rollouts = static_cast<std::size_t>(config.rollouts_per_scene);
  const std::size_t per_value = scenes.size() * rollouts;
  const auto total = static_cast<std::int64_t>(config.values.size() * per_value);
  std::vector<RolloutOutcome> outcomes(static_cast<std::size_t>(total));

#ifdef _OPENMP
  const int n_threads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(n_threads)
#else
  (void)threads;
#endif
  for (std::int64_t i = 0; i < total; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::size_t v = idx / per_value;
    const std::size_t s = (idx % per_value) / rollouts;
    const std::size_t r = idx % rollouts;
    outcomes[idx] = run_rollout(config, scenes[s], s, r, config.values[v]);
  }
  return reduce_outcomes(config, outcomes);
}

std::string sweep_csv_header() {
  return "sigma,mean_confusion,sd_confusion,mean_rmse,sd_rmse,n_rollouts,skipped,mean_rmse_matched,sd_rmse_matched";
}

std::string sweep_csv_row(const SweepRow& row) {
  return format_number(row.value) + "," + format_number(row.mean_confusion) + "," +
         format_number(row.sd_confusion) + "," + format_number(row.mean_rmse) + "," +
         format_number(row.sd_rmse) + "," + std::to_string(row.n_rollouts) + "," + std::to_string(row.skipped) +
         "," + format_number(row.mean_rmse_matched) + "," + format_number(row.sd_rmse_matched);
}

namespace {
std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidParameter("spearman_rho needs >= 2 paired values");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace coopriv
