#pragma once

// Monte Carlo estimation of ARL and WADD and the operating curve.
//
// Every trial draws from its own stream Rng::stream(seed, {purpose, ...}), so
// estimates are identical for any thread count and trial i sees the same
// samples for every c_s on the grid.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nipt/config.hpp"
#include "nipt/detector.hpp"
#include "nipt/distributions.hpp"
#include "nipt/projection.hpp"
#include "nipt/rng.hpp"
#include "nipt/statistics.hpp"

namespace nipt {

NetworkModel build_model(const ScenarioConfig& config);

struct SamplerStats {
  std::size_t draws = 0;
  std::size_t accepted = 0;
};

/// Dirichlet(1) draw on the sensor's alphabet conditioned on q_j >= q_j_min.
/// Throws std::runtime_error if fewer than 1e-4 of the first max_draws
/// proposals are accepted.
Pmf sample_post_change(const Sensor& sensor, Rng& rng, std::size_t max_draws = 100000,
                       SamplerStats* stats = nullptr);

/// One post-change hypothesis: the affected sensors and their pmfs.
struct PostChange {
  std::vector<std::size_t> affected;  // sorted
  std::vector<Pmf> pmfs;              // pmfs[i] belongs to affected[i]
};

std::vector<PostChange> sample_scenarios(const NetworkModel& model, const ScenarioConfig& config);

/// X_{j,k} ~ f_{j,1} for k >= t_1 and j affected, f_{j,0} otherwise.
class StreamGenerator {
 public:
  StreamGenerator(const NetworkModel& model, const PostChange* post, std::optional<std::size_t> t1, Rng rng);
  JointSample next();
  std::size_t time() const { return k_; }

 private:
  std::vector<std::vector<double>> pre_cdf_;
  std::vector<std::vector<double>> post_cdf_;  // empty for unaffected sensors
  std::optional<std::size_t> t1_;
  Rng rng_;
  std::size_t k_ = 0;
  JointSample sample_;
};

std::vector<JointSample> generate_stream(const NetworkModel& model, const PostChange* post,
                                         std::optional<std::size_t> t1, std::size_t length, std::uint64_t seed);

enum StreamPurpose : std::uint64_t { kScenarioStream = 1, kArlStream = 2, kWaddStream = 3 };

struct TrialRecord {
  std::size_t trial = 0;
  std::optional<std::size_t> t1;
  RunRecord run;
  /// (t_I - t_1 + 1)^+; unset when censored or t_1 is infinite.
  std::optional<std::size_t> delay;
};

struct ArlEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  std::size_t censored = 0;
  double censored_fraction() const { return trials ? static_cast<double>(censored) / trials : 0.0; }
  /// Censored trials enter the mean at max_steps, so the mean is a lower bound.
  bool lower_bound() const { return censored > 0; }
  std::vector<TrialRecord> records;
};

struct MonteCarloOptions {
  std::uint64_t seed = 1;
  std::size_t max_steps = 100000;
  std::size_t threads = 1;
  DetectorOptions detector;
};

/// t_1 = infinity. Throws std::runtime_error if every trial is censored.
ArlEstimate estimate_arl(const NetworkModel& model, const ThresholdSchedule& schedule, const ProjectionTable& table,
                         std::size_t trials, const MonteCarloOptions& options);

struct WaddCell {
  std::size_t scenario = 0;
  std::size_t t1 = 1;
  double mean_delay = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
  std::size_t censored = 0;
};

struct WaddEstimate {
  double worst = 0.0;
  double worst_standard_error = 0.0;
  std::size_t worst_cell = 0;
  std::vector<WaddCell> cells;  // scenario-major, then t_1
};

/// Max over (scenario, t_1) cells of the mean delay; censored trials are
/// excluded from the cell means. Throws std::runtime_error if a cell is fully
/// censored, and std::invalid_argument for an empty or infinite t_1 grid.
WaddEstimate estimate_wadd(const NetworkModel& model, const ThresholdSchedule& schedule,
                           const ProjectionTable& table, const std::vector<PostChange>& scenarios,
                           const std::vector<std::size_t>& t1_grid, std::size_t trials_per_cell,
                           const MonteCarloOptions& options);

struct CurveRow {
  double c_s = 0.0;
  double kappa = 0.0;
  double est_arl = 0.0;
  double est_wadd = 0.0;
  double arl_bound = 0.0;
  double gamma_wadd_bound = 0.0;
  double v_star = 0.0;
  double arl_standard_error = 0.0;
  double arl_censored_fraction = 0.0;
  double wadd_standard_error = 0.0;
};

ThresholdSchedule schedule_for(const ScenarioConfig& config, const NetworkModel& model, double c_s);

/// Table size covering the windows an alarm can produce in the scenario.
std::size_t default_n_max(const ScenarioConfig& config, double c_s);

/// Censoring horizon: 100 times the ARL bound at the largest c_s, clamped to
/// [1e6, 1e8].
std::size_t default_max_steps(const ScenarioConfig& config, const NetworkModel& model);

std::vector<CurveRow> operating_curve(const ScenarioConfig& config);

/// Header c_s,kappa,est_arl,est_wadd,thm1_bound,eq4_bound,v_star.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

}  // namespace nipt
