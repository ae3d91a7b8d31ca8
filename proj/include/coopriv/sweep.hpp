#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coopriv/adversary.hpp"
#include "coopriv/obfuscation.hpp"
#include "coopriv/scene.hpp"

namespace coopriv {

/// Parametric scenario suite. Scene i uses layouts[i % layouts.size()] and a
/// seed derived from (seed, i).
struct SuiteSpec {
  std::vector<RoadLayout> layouts{RoadLayout::straight, RoadLayout::grid_intersection,
                                  RoadLayout::two_lane_highway};
  int scenes{20};
  int vehicles{8};
  double duration{20.0};
  double dt{0.1};
  std::uint64_t seed{1};
};

std::vector<Scenario> generate_suite(const SuiteSpec& spec);

struct SweepConfig {
  SuiteSpec suite;
  /// Kind of the swept policy; the swept value is sigma for gaussian, radius
  /// for fixed-offset and max_radius for smoothed-random-walk.
  PolicyKind policy{PolicyKind::gaussian};
  /// Increment deviation for smoothed-random-walk, as a fraction of the swept value.
  double walk_step_fraction{0.25};
  std::vector<double> values{0, 2, 4, 8, 12, 16};
  int rollouts_per_scene{50};
  PseudonymPolicy pseudonyms;
  StreamOptions stream;
  PrivacyOptions privacy;
  std::uint64_t seed{1};
  /// When non-empty, replaces the generated suite (e.g. imported scenes).
  std::vector<Scenario> custom_scenes;

  std::size_t scene_count() const {
    return custom_scenes.empty() ? static_cast<std::size_t>(suite.scenes) : custom_scenes.size();
  }
  void validate() const;
};

/// Policy used for one sweep value with the rollout's seed.
ObfuscationPolicy sweep_policy(const SweepConfig& config, double value, std::uint64_t seed);

struct RolloutOutcome {
  bool skipped{false};
  double confusion{0.0};
  double rmse{0.0};
  double rmse_matched{0.0};
};

/// Runs rollout `rollout` of scene `scene` at sweep value `value`. The ego
/// and the policy seed depend only on (config.seed, scene, rollout), so every
/// sweep value sees the same egos and noise streams.
RolloutOutcome run_rollout(const SweepConfig& config, const Scenario& scene, std::size_t scene_index,
                           std::size_t rollout, double value);

struct SweepRow {
  double value{0.0};
  double mean_confusion{0.0};
  double sd_confusion{0.0};
  double mean_rmse{0.0};
  double sd_rmse{0.0};
  double mean_rmse_matched{0.0};
  double sd_rmse_matched{0.0};
  std::size_t n_rollouts{0};
  std::size_t skipped{0};

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t rollouts_executed{0};
};

/// Reference implementation: one rollout after another.
SweepResult run_sweep_serial(const SweepConfig& config);

/// OpenMP-parallel over (value, scene, rollout). Outcomes are stored by
/// rollout index and reduced in a fixed order, so the result is identical to
/// run_sweep_serial for any thread count. `threads <= 0` uses the OpenMP
/// default.
SweepResult run_sweep(const SweepConfig& config, int threads = 0);

/// Aggregates per-rollout outcomes (indexed value-major, then scene, then
/// rollout) into sweep rows.
SweepResult reduce_outcomes(const SweepConfig& config, const std::vector<RolloutOutcome>& outcomes);

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);

/// Spearman rank correlation (average ranks for ties).
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace coopriv
