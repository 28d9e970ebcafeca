// Command-line front end. Every subcommand starts from the built-in reduced
// variance scenario or --config FILE, then applies flag overrides.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nipt/analysis.hpp"
#include "nipt/config.hpp"
#include "nipt/detector.hpp"
#include "nipt/harness.hpp"
#include "nipt/projection.hpp"

using namespace nipt;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> kappa;
  std::optional<double> rho;
  std::optional<std::string> schedule;
  std::vector<double> c_s_grid;
  std::vector<std::string> t1_grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> arl_trials;
  std::optional<std::size_t> wadd_trials;
  std::optional<std::size_t> post_change_count;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> window_cap;
  std::optional<double> tolerance;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON scenario file (default: built-in reduced variance scenario)");
  cmd->add_option("--kappa", o.kappa, "drift kappa");
  cmd->add_option("--rho", o.rho, "schedule parameter rho in (0, 1)");
  cmd->add_option("--schedule", o.schedule, "optimal | always_confirm | never_confirm");
  cmd->add_option("--c-s", o.c_s_grid, "first-stage threshold(s)");
  cmd->add_option("--t1", o.t1_grid, "change points (integers or inf)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--arl-trials", o.arl_trials, "ARL trials per threshold");
  cmd->add_option("--wadd-trials", o.wadd_trials, "WADD trials per (post-change, t1) cell");
  cmd->add_option("--post-change-count", o.post_change_count, "number of sampled post-change hypotheses");
  cmd->add_option("--max-steps", o.max_steps, "censoring horizon per run");
  cmd->add_option("--n-max", o.n_max, "projection table size");
  cmd->add_option("--window-cap", o.window_cap, "hard cap on the scan window (changes the statistic)");
  cmd->add_option("--tolerance", o.tolerance, "projection tolerance (l1)");
  cmd->add_flag("-v,--verbose", o.verbose, "log progress to stderr");
}

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig c = o.config_path.empty() ? reduced_reproduction_config() : load_config(o.config_path);
  if (o.kappa) c.kappa = *o.kappa;
  if (o.rho) c.rho = *o.rho;
  if (o.schedule) {
    if (*o.schedule == "optimal") {
      c.schedule = ScheduleMode::optimal;
    } else if (*o.schedule == "always_confirm") {
      c.schedule = ScheduleMode::always_confirm;
    } else if (*o.schedule == "never_confirm") {
      c.schedule = ScheduleMode::never_confirm;
    } else {
      throw CLI::ValidationError("--schedule", "unknown schedule '" + *o.schedule + "'");
    }
  }
  if (!o.c_s_grid.empty()) c.c_s_grid = o.c_s_grid;
  if (!o.t1_grid.empty()) {
    c.t1_grid.clear();
    for (const auto& t : o.t1_grid) {
      if (t == "inf") {
        c.t1_grid.push_back(std::nullopt);
      } else {
        const long long v = std::stoll(t);
        if (v < 1) throw CLI::ValidationError("--t1", "change points must be >= 1");
        c.t1_grid.push_back(static_cast<std::size_t>(v));
      }
    }
  }
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : *o.threads;
  if (o.arl_trials) c.arl_trials = *o.arl_trials;
  if (o.wadd_trials) c.wadd_trials_per_cell = *o.wadd_trials;
  if (o.post_change_count) c.post_change_count = *o.post_change_count;
  if (o.max_steps) c.max_steps = *o.max_steps;
  if (o.n_max) c.n_max = *o.n_max;
  if (o.window_cap) c.window_cap = *o.window_cap;
  if (o.tolerance) c.projection_tolerance = *o.tolerance;
  spdlog::set_level(o.verbose ? spdlog::level::info : spdlog::level::warn);
  return c;
}

double single_c_s(const ScenarioConfig& c) {
  if (c.c_s_grid.size() != 1) throw CLI::ValidationError("--c-s", "this subcommand needs exactly one threshold");
  return c.c_s_grid.front();
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string format_factors(const std::vector<Pmf>& factors) {
  std::string out;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    out += "f_" + std::to_string(j + 1) + " =";
    for (double p : factors[j].probs()) out += " " + num(p);
    out += "\n";
  }
  return out;
}

ProjectionOptions projection_options(const ScenarioConfig& c) {
  ProjectionOptions p;
  p.tolerance = c.projection_tolerance;
  return p;
}

ProjectionTable load_or_build_table(const ScenarioConfig& c, const NetworkModel& model, double c_s,
                                    const std::string& path) {
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table '" + path + "'");
    return ProjectionTable::read(in, model);
  }
  return ProjectionTable::build(model, c_s, c.kappa, default_n_max(c, c_s), projection_options(c), c.threads);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

JointSample parse_sample_line(const std::string& line, const NetworkModel& model, std::size_t line_no) {
  std::stringstream ss(line);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != model.size() + 1) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": expected k and " + std::to_string(model.size()) +
                             " symbols");
  }
  JointSample x;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double label = std::stod(fields[j + 1]);
    const auto idx = model.alphabet(j).index_of(label);
    if (!idx) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": symbol " + fields[j + 1] +
                               " not in the alphabet of sensor " + std::to_string(j + 1));
    }
    x.symbols.push_back(static_cast<std::uint32_t>(*idx));
  }
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("nipt"));
  CLI::App app{"NIPT: two-stage change detection over sensor networks"};
  app.require_subcommand(1);
  Overrides o;

  auto* project_cmd = app.add_subcommand("project", "solve one most-likely-false-alarm projection");
  add_common(project_cmd, o);
  std::optional<double> target;
  std::optional<std::size_t> window_n;
  project_cmd->add_option("--target", target, "projection target eta");
  project_cmd->add_option("--n", window_n, "window length; target = c_s / n + kappa");

  auto* table_cmd = app.add_subcommand("table", "build and export a projection table");
  add_common(table_cmd, o);
  std::string table_out;
  table_cmd->add_option("--out", table_out, "output file (default stdout)");

  auto* detect_cmd = app.add_subcommand("detect", "run the detector over lines 'k,sym_1,...,sym_J'");
  add_common(detect_cmd, o);
  std::string input_path;
  std::string table_path;
  bool stop_at_alarm = false;
  detect_cmd->add_option("--input", input_path, "input file (default stdin)");
  detect_cmd->add_option("--table", table_path, "precomputed projection table");
  detect_cmd->add_flag("--stop", stop_at_alarm, "exit after the first confirmed alarm");

  auto* bounds_cmd = app.add_subcommand("bounds", "print the asymptotic ARL and WADD bounds");
  add_common(bounds_cmd, o);
  std::optional<double> gamma;
  bounds_cmd->add_option("--gamma", gamma, "target ARL gamma (default: the ARL bound at c_s)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo ARL and WADD at one threshold");
  add_common(simulate_cmd, o);
  std::string records_path;
  simulate_cmd->add_option("--records", records_path, "per-trial CSV output");

  auto* curve_cmd = app.add_subcommand("curve", "operating curve CSV over the c_s grid");
  add_common(curve_cmd, o);
  std::string curve_out;
  curve_cmd->add_option("--out", curve_out, "output CSV (default stdout)");

  auto* repro_cmd = app.add_subcommand("reproduce", "operating curve for the built-in reduced variance scenario");
  add_common(repro_cmd, o);
  std::string repro_out;
  repro_cmd->add_option("--out", repro_out, "output CSV (default stdout)");

  auto* show_cmd = app.add_subcommand("show-config", "print the resolved scenario as JSON");
  add_common(show_cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (repro_cmd->parsed() && !o.config_path.empty()) {
      throw CLI::ValidationError("--config", "reproduce always uses the built-in scenario");
    }
    const ScenarioConfig config = resolve(o);

    if (show_cmd->parsed()) {
      std::cout << dump_config(config) << "\n";
      return 0;
    }
    const NetworkModel model = build_model(config);

    if (project_cmd->parsed()) {
      double eta;
      if (target) {
        eta = *target;
      } else if (window_n) {
        if (*window_n == 0) throw CLI::ValidationError("--n", "window length must be >= 1");
        eta = single_c_s(config) / static_cast<double>(*window_n) + config.kappa;
      } else {
        throw CLI::ValidationError("project", "give --target or --n with --c-s");
      }
      const ProjectionResult r = project(model, eta, projection_options(config));
      std::cout << "status " << to_string(r.status) << "\n"
                << "target " << num(r.target) << "\n"
                << "achieved " << num(r.achieved) << "\n"
                << "kl " << num(r.kl_value) << "\n"
                << "lambda " << num(r.lambda) << "\n"
                << "kkt_residual " << num(r.kkt_residual) << "\n"
                << format_factors(r.factors);
      return 0;
    }

    if (table_cmd->parsed()) {
      const double c_s = single_c_s(config);
      const ProjectionTable t = load_or_build_table(config, model, c_s, "");
      std::ostringstream out;
      t.write(out);
      write_output(table_out, out.str());
      return 0;
    }

    if (detect_cmd->parsed()) {
      const double c_s = single_c_s(config);
      const ProjectionTable t = load_or_build_table(config, model, c_s, table_path);
      const ThresholdSchedule schedule = schedule_for(config, model, t.c_s());
      NiptDetector detector(model, schedule, t, DetectorOptions{config.window_cap});
      std::ifstream file;
      std::istream* in = &std::cin;
      if (!input_path.empty()) {
        file.open(input_path);
        if (!file) throw std::runtime_error("cannot open input '" + input_path + "'");
        in = &file;
      }
      std::cout << "k,event,S,n,D,threshold\n";
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(*in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.rfind("k,", 0) == 0) continue;
        const DecisionEvent ev = detector.step(parse_sample_line(line, model, line_no));
        std::cout << ev.k << "," << to_string(ev.kind) << "," << num(ev.statistic) << "," << ev.window << ","
                  << num(ev.divergence) << "," << num(ev.threshold) << "\n";
        if (ev.kind == EventKind::alarm_confirmed) {
          if (stop_at_alarm) break;
          detector.restart();
        }
      }
      return 0;
    }

    if (bounds_cmd->parsed()) {
      const double c_s = single_c_s(config);
      double g = gamma.value_or(0.0);
      if (!gamma) {
        const double v = v_star(step_distribution(model, config.kappa, StepMode::linearized));
        g = arl_lower_bound(v, config.kappa, model.lipschitz_sum(), c_s).value;
      }
      const BoundReport report = bound_report(model, config.kappa, c_s, g);
      std::cout << format_report(report) << "\n" << report_csv_header() << "\n" << report_csv_row(report) << "\n";
      return 0;
    }

    if (simulate_cmd->parsed()) {
      const double c_s = single_c_s(config);
      const ThresholdSchedule schedule = schedule_for(config, model, c_s);
      const ProjectionTable t = load_or_build_table(config, model, c_s, "");
      MonteCarloOptions mc;
      mc.seed = config.seed;
      mc.max_steps = default_max_steps(config, model);
      mc.threads = config.threads;
      mc.detector.window_cap = config.window_cap;
      const ArlEstimate arl = estimate_arl(model, schedule, t, config.arl_trials, mc);
      std::cout << "c_s " << num(c_s) << "\n"
                << "arl " << num(arl.mean) << "\n"
                << "arl_standard_error " << num(arl.standard_error) << "\n"
                << "arl_censored " << arl.censored << " of " << arl.trials
                << (arl.lower_bound() ? " (ARL is a lower bound)" : "") << "\n";
      std::vector<std::size_t> t1;
      for (const auto& x : config.t1_grid) {
        if (x) t1.push_back(*x);
      }
      std::optional<WaddEstimate> wadd;
      std::vector<PostChange> scenarios;
      if (!t1.empty() && config.post_change_count > 0) {
        scenarios = sample_scenarios(model, config);
        wadd = estimate_wadd(model, schedule, t, scenarios, t1, config.wadd_trials_per_cell, mc);
        const WaddCell& worst = wadd->cells[wadd->worst_cell];
        std::cout << "wadd " << num(wadd->worst) << "\n"
                  << "wadd_standard_error " << num(wadd->worst_standard_error) << "\n"
                  << "wadd_worst_cell scenario=" << worst.scenario << " t1=" << worst.t1 << "\n";
      }
      if (!records_path.empty()) {
        std::ostringstream out;
        out << "kind,trial,seed,t1,t_s,t_i,censored,suppressions,delay\n";
        for (const auto& r : arl.records) {
          out << "arl," << r.trial << "," << config.seed << ",inf,";
          out << (r.run.first_crossing ? std::to_string(*r.run.first_crossing) : "") << ",";
          out << (r.run.stop ? std::to_string(*r.run.stop) : "") << "," << (r.run.censored() ? 1 : 0) << ","
              << r.run.suppressions << ",\n";
        }
        write_output(records_path, out.str());
      }
      return 0;
    }

    if (curve_cmd->parsed() || repro_cmd->parsed()) {
      const std::vector<CurveRow> rows = operating_curve(config);
      std::ostringstream out;
      write_curve_csv(out, rows);
      write_output(curve_cmd->parsed() ? curve_out : repro_out, out.str());
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
