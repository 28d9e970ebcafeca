#pragma once

// Scenario configuration, stored as JSON. See README.md for the schema.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nipt {

struct SensorSpec {
  std::vector<double> labels;
  /// "discrete_gaussian", "uniform" or "probs".
  std::string reference = "discrete_gaussian";
  double gaussian_d = 1.0;
  std::vector<double> probs;
  /// "variance" or "mean".
  std::string statistic = "variance";
  /// Variance offset; defaults to the reference variance.
  std::optional<double> offset;
  /// Mean statistic h; defaults to the labels.
  std::vector<double> h;
  double floor = 1.0;
};

enum class AffectedMode { all, random, fixed };

enum class ScheduleMode {
  /// Two-level rule derived from (c_s, kappa, rho).
  optimal,
  /// c_n^D = 0: stage two never suppresses.
  always_confirm,
  /// c_n^D = +inf: stage two suppresses everything.
  never_confirm,
};

struct ScenarioConfig {
  std::vector<SensorSpec> sensors;
  double kappa = 0.25;
  double rho = 0.2;
  ScheduleMode schedule = ScheduleMode::optimal;
  std::vector<double> c_s_grid;

  AffectedMode affected = AffectedMode::all;
  std::vector<std::size_t> affected_sensors;  // used when affected == fixed
  /// Change points; nullopt stands for t_1 = infinity.
  std::vector<std::optional<std::size_t>> t1_grid;
  std::size_t post_change_count = 200;
  std::size_t sampler_max_draws = 100000;

  std::size_t arl_trials = 1000;
  std::size_t wadd_trials_per_cell = 17;
  std::uint64_t seed = 1;
  /// Censoring horizon; derived from the ARL bound when unset.
  std::optional<std::size_t> max_steps;
  std::size_t threads = 1;

  double projection_tolerance = 1e-6;
  /// Projection table size; derived from c_s, kappa and the t_1 grid when unset.
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> window_cap;
};

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& config);

/// Reduced-scale variance scenario: three sensors on {-4..4}, discrete
/// Gaussian references, q_j = Var - Var_{f0} with floor 1, kappa = 0.25.
ScenarioConfig reduced_reproduction_config();

}  // namespace nipt
