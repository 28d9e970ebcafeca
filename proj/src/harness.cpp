#include "nipt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "nipt/analysis.hpp"
#include "nipt/parallel.hpp"

namespace nipt {

namespace {

struct Moments {
  double mean = 0.0;
  double standard_error = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double total = 0.0;
  for (double x : xs) total += x;
  m.mean = total / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.standard_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return m;
}

std::vector<std::size_t> finite_t1(const ScenarioConfig& config) {
  std::vector<std::size_t> out;
  for (const auto& t : config.t1_grid) {
    if (t) out.push_back(*t);
  }
  return out;
}

}  // namespace

NetworkModel build_model(const ScenarioConfig& config) {
  std::vector<Sensor> sensors;
  for (const SensorSpec& spec : config.sensors) {
    Alphabet alphabet(spec.labels);
    Pmf f0 = spec.reference == "uniform"           ? Pmf::uniform(alphabet)
             : spec.reference == "discrete_gaussian" ? Pmf::discrete_gaussian(alphabet, spec.gaussian_d)
                                                     : Pmf(alphabet, spec.probs);
    LocalStatistic stat = [&] {
      if (spec.statistic == "mean") {
        const std::vector<double>& h = spec.h.empty() ? spec.labels : spec.h;
        return make_mean_statistic(h, f0, spec.floor);
      }
      if (spec.offset) return make_variance_statistic(f0, *spec.offset, spec.floor);
      return make_centred_variance_statistic(f0, spec.floor);
    }();
    sensors.push_back(Sensor{std::move(f0), std::move(stat)});
  }
  return NetworkModel(std::move(sensors));
}

Pmf sample_post_change(const Sensor& sensor, Rng& rng, std::size_t max_draws, SamplerStats* stats) {
  const auto floor = sensor.statistic.floor();
  if (!floor) throw std::invalid_argument("sample_post_change: statistic has no floor");
  if (sensor.statistic.max_value() && *sensor.statistic.max_value() < *floor) {
    throw std::invalid_argument("sample_post_change: constraint region q_j >= q_j_min is empty");
  }
  const Alphabet& alphabet = sensor.reference.alphabet();
  for (std::size_t draw = 0; draw < max_draws; ++draw) {
    Pmf f = dirichlet_pmf(alphabet, rng);
    if (stats) ++stats->draws;
    if (sensor.statistic.eval(f) >= *floor) {
      if (stats) ++stats->accepted;
      return f;
    }
  }
  throw std::runtime_error("post-change sampler accepted no proposal in " + std::to_string(max_draws) +
                           " draws (acceptance below 1e-4); use a different sampler for this constraint");
}

std::vector<PostChange> sample_scenarios(const NetworkModel& model, const ScenarioConfig& config) {
  std::vector<PostChange> out;
  SamplerStats stats;
  const std::size_t J = model.size();
  for (std::size_t i = 0; i < config.post_change_count; ++i) {
    Rng rng = Rng::stream(config.seed, {kScenarioStream, i});
    PostChange pc;
    switch (config.affected) {
      case AffectedMode::all:
        for (std::size_t j = 0; j < J; ++j) pc.affected.push_back(j);
        break;
      case AffectedMode::fixed:
        pc.affected = config.affected_sensors;
        std::sort(pc.affected.begin(), pc.affected.end());
        pc.affected.erase(std::unique(pc.affected.begin(), pc.affected.end()), pc.affected.end());
        break;
      case AffectedMode::random: {
        if (J >= 63) throw std::invalid_argument("random affected subsets need fewer than 63 sensors");
        const std::size_t mask = 1 + rng.below((std::size_t{1} << J) - 1);
        for (std::size_t j = 0; j < J; ++j) {
          if (mask >> j & 1U) pc.affected.push_back(j);
        }
        break;
      }
    }
    for (std::size_t j : pc.affected) {
      pc.pmfs.push_back(sample_post_change(model.sensor(j), rng, config.sampler_max_draws, &stats));
    }
    out.push_back(std::move(pc));
  }
  if (stats.draws > 0) {
    spdlog::info("post-change sampler: {} of {} proposals accepted (rejection rate {:.4f})", stats.accepted,
                 stats.draws, 1.0 - static_cast<double>(stats.accepted) / static_cast<double>(stats.draws));
  }
  return out;
}

StreamGenerator::StreamGenerator(const NetworkModel& model, const PostChange* post, std::optional<std::size_t> t1,
                                 Rng rng)
    : t1_(t1), rng_(std::move(rng)) {
  const std::size_t J = model.size();
  post_cdf_.resize(J);
  for (std::size_t j = 0; j < J; ++j) pre_cdf_.push_back(cumulative(model.reference(j).probs()));
  if (post) {
    if (post->affected.size() != post->pmfs.size()) throw std::invalid_argument("post-change: pmf count mismatch");
    for (std::size_t i = 0; i < post->affected.size(); ++i) {
      const std::size_t j = post->affected[i];
      if (j >= J) throw std::invalid_argument("post-change: sensor index out of range");
      if (!(post->pmfs[i].alphabet() == model.alphabet(j))) {
        throw std::invalid_argument("post-change: alphabet mismatch");
      }
      post_cdf_[j] = cumulative(post->pmfs[i].probs());
    }
  }
  sample_.symbols.resize(J);
}

JointSample StreamGenerator::next() {
  ++k_;
  const bool changed = t1_ && k_ >= *t1_;
  for (std::size_t j = 0; j < pre_cdf_.size(); ++j) {
    const auto& cdf = changed && !post_cdf_[j].empty() ? post_cdf_[j] : pre_cdf_[j];
    sample_.symbols[j] = static_cast<std::uint32_t>(rng_.categorical(cdf));
  }
  return sample_;
}

std::vector<JointSample> generate_stream(const NetworkModel& model, const PostChange* post,
                                         std::optional<std::size_t> t1, std::size_t length, std::uint64_t seed) {
  StreamGenerator gen(model, post, t1, Rng(seed));
  std::vector<JointSample> out;
  out.reserve(length);
  for (std::size_t k = 0; k < length; ++k) out.push_back(gen.next());
  return out;
}

ArlEstimate estimate_arl(const NetworkModel& model, const ThresholdSchedule& schedule, const ProjectionTable& table,
                         std::size_t trials, const MonteCarloOptions& options) {
  if (trials == 0) throw std::invalid_argument("estimate_arl: no trials");
  ArlEstimate est;
  est.trials = trials;
  est.records.resize(trials);
  parallel_for(trials, options.threads, [&](std::size_t i) {
    StreamGenerator gen(model, nullptr, std::nullopt, Rng::stream(options.seed, {kArlStream, i}));
    TrialRecord& rec = est.records[i];
    rec.trial = i;
    rec.run = run_until_alarm([&] { return gen.next(); }, model, schedule, table, options.max_steps,
                              options.detector);
  });
  std::vector<double> lengths;
  lengths.reserve(trials);
  for (const auto& rec : est.records) {
    if (rec.run.censored()) ++est.censored;
    lengths.push_back(static_cast<double>(rec.run.stop.value_or(options.max_steps)));
  }
  if (est.censored == trials) {
    throw std::runtime_error("every ARL trial was censored at max_steps = " + std::to_string(options.max_steps));
  }
  const Moments m = moments(lengths);
  est.mean = m.mean;
  est.standard_error = m.standard_error;
  return est;
}

WaddEstimate estimate_wadd(const NetworkModel& model, const ThresholdSchedule& schedule,
                           const ProjectionTable& table, const std::vector<PostChange>& scenarios,
                           const std::vector<std::size_t>& t1_grid, std::size_t trials_per_cell,
                           const MonteCarloOptions& options) {
  if (t1_grid.empty()) throw std::invalid_argument("estimate_wadd: t1 grid must be finite and nonempty");
  if (scenarios.empty()) throw std::invalid_argument("estimate_wadd: no post-change scenarios");
  if (trials_per_cell == 0) throw std::invalid_argument("estimate_wadd: no trials per cell");
  const std::size_t cells = scenarios.size() * t1_grid.size();
  std::vector<RunRecord> runs(cells * trials_per_cell);
  parallel_for(runs.size(), options.threads, [&](std::size_t idx) {
    const std::size_t cell = idx / trials_per_cell;
    const std::size_t trial = idx % trials_per_cell;
    const std::size_t s = cell / t1_grid.size();
    const std::size_t t1 = t1_grid[cell % t1_grid.size()];
    StreamGenerator gen(model, &scenarios[s], t1, Rng::stream(options.seed, {kWaddStream, s, t1, trial}));
    runs[idx] = run_until_alarm([&] { return gen.next(); }, model, schedule, table, options.max_steps,
                                options.detector);
  });
  WaddEstimate est;
  est.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    WaddCell c;
    c.scenario = cell / t1_grid.size();
    c.t1 = t1_grid[cell % t1_grid.size()];
    c.trials = trials_per_cell;
    std::vector<double> delays;
    for (std::size_t t = 0; t < trials_per_cell; ++t) {
      const RunRecord& r = runs[cell * trials_per_cell + t];
      if (r.censored()) {
        ++c.censored;
        continue;
      }
      delays.push_back(*r.stop >= c.t1 ? static_cast<double>(*r.stop - c.t1 + 1) : 0.0);
    }
    if (delays.empty()) {
      throw std::runtime_error("WADD cell (scenario " + std::to_string(c.scenario) + ", t1 " + std::to_string(c.t1) +
                               ") fully censored");
    }
    const Moments m = moments(delays);
    c.mean_delay = m.mean;
    c.standard_error = m.standard_error;
    if (c.mean_delay > est.worst) {
      est.worst = c.mean_delay;
      est.worst_standard_error = c.standard_error;
      est.worst_cell = cell;
    }
    est.cells.push_back(c);
  }
  return est;
}

ThresholdSchedule schedule_for(const ScenarioConfig& config, const NetworkModel& model, double c_s) {
  switch (config.schedule) {
    case ScheduleMode::always_confirm:
      return ThresholdSchedule::always_confirm(c_s, config.kappa);
    case ScheduleMode::never_confirm:
      return ThresholdSchedule::never_confirm(c_s, config.kappa);
    case ScheduleMode::optimal:
      break;
  }
  ThresholdSchedule s = make_schedule(model, c_s, config.kappa, config.rho);
  for (const auto& w : s.warnings()) spdlog::warn("c_s = {}: {}", c_s, w);
  return s;
}

std::size_t default_n_max(const ScenarioConfig& config, double c_s) {
  if (config.n_max) return *config.n_max;
  std::size_t t1_max = 0;
  for (std::size_t t : finite_t1(config)) t1_max = std::max(t1_max, t);
  return 4 * t1_max + static_cast<std::size_t>(std::ceil(20.0 * c_s / config.kappa)) + 100;
}

std::size_t default_max_steps(const ScenarioConfig& config, const NetworkModel& model) {
  if (config.max_steps) return *config.max_steps;
  double c_max = 0.0;
  for (double c : config.c_s_grid) c_max = std::max(c_max, c);
  const double v = v_star(step_distribution(model, config.kappa, StepMode::linearized));
  const double exponent = arl_lower_bound(v, config.kappa, model.lipschitz_sum(), c_max).exponent;
  const double steps = 100.0 * std::exp(std::min(exponent, 40.0));
  return static_cast<std::size_t>(std::clamp(steps, 1e6, 1e8));
}

std::vector<CurveRow> operating_curve(const ScenarioConfig& config) {
  if (config.c_s_grid.empty()) throw std::invalid_argument("operating curve needs a c_s grid");
  const NetworkModel model = build_model(config);
  const double v = v_star(step_distribution(model, config.kappa, StepMode::linearized));
  const double L = model.lipschitz_sum();
  const double q_floor = model.min_floor() - config.kappa;
  const std::vector<std::size_t> t1 = finite_t1(config);
  const std::vector<PostChange> scenarios =
      t1.empty() ? std::vector<PostChange>{} : sample_scenarios(model, config);

  MonteCarloOptions mc;
  mc.seed = config.seed;
  mc.max_steps = default_max_steps(config, model);
  mc.threads = config.threads;
  mc.detector.window_cap = config.window_cap;

  ProjectionOptions popts;
  popts.tolerance = config.projection_tolerance;

  std::vector<CurveRow> rows;
  for (double c_s : config.c_s_grid) {
    const ThresholdSchedule schedule = schedule_for(config, model, c_s);
    const ProjectionTable table =
        ProjectionTable::build(model, c_s, config.kappa, default_n_max(config, c_s), popts, config.threads);
    CurveRow row;
    row.c_s = c_s;
    row.kappa = config.kappa;
    row.v_star = v;
    const ArlEstimate arl = estimate_arl(model, schedule, table, config.arl_trials, mc);
    row.est_arl = arl.mean;
    row.arl_standard_error = arl.standard_error;
    row.arl_censored_fraction = arl.censored_fraction();
    if (arl.lower_bound()) {
      spdlog::warn("c_s = {}: {} of {} ARL trials censored at {}; ARL is a lower-bound estimate", c_s, arl.censored,
                   arl.trials, mc.max_steps);
    }
    if (!t1.empty()) {
      const WaddEstimate wadd = estimate_wadd(model, schedule, table, scenarios, t1, config.wadd_trials_per_cell, mc);
      row.est_wadd = wadd.worst;
      row.wadd_standard_error = wadd.worst_standard_error;
    } else {
      row.est_wadd = std::numeric_limits<double>::quiet_NaN();
    }
    row.arl_bound = arl_lower_bound(v, config.kappa, L, c_s).value;
    row.gamma_wadd_bound = gamma_bound(row.est_arl, q_floor, v, config.kappa, L);
    spdlog::info("c_s = {}: ARL {:.6g} (se {:.3g}), WADD {:.6g}", c_s, row.est_arl, row.arl_standard_error,
                 row.est_wadd);
    rows.push_back(row);
  }
  return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
  out << "c_s,kappa,est_arl,est_wadd,thm1_bound,eq4_bound,v_star\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.c_s, r.kappa, r.est_arl, r.est_wadd,
                  r.arl_bound, r.gamma_wadd_bound, r.v_star);
    out << buf;
  }
}

}  // namespace nipt
