#include "nipt/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nipt {

namespace {

using nlohmann::json;

std::vector<double> labels_from(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object() && j.contains("lo") && j.contains("hi")) {
    const int lo = j.at("lo").get<int>();
    const int hi = j.at("hi").get<int>();
    if (hi <= lo) throw std::invalid_argument("config: alphabet range needs hi > lo");
    std::vector<double> out;
    for (int a = lo; a <= hi; ++a) out.push_back(a);
    return out;
  }
  throw std::invalid_argument("config: alphabet must be a label list or {lo, hi}");
}

SensorSpec sensor_from(const json& j) {
  SensorSpec s;
  s.labels = labels_from(j.at("alphabet"));
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    if (r.is_string()) {
      s.reference = r.get<std::string>();
    } else {
      s.reference = r.at("kind").get<std::string>();
      s.gaussian_d = r.value("d", 1.0);
      if (r.contains("probs")) s.probs = r.at("probs").get<std::vector<double>>();
    }
  }
  if (s.reference != "discrete_gaussian" && s.reference != "uniform" && s.reference != "probs") {
    throw std::invalid_argument("config: unknown reference kind '" + s.reference + "'");
  }
  if (j.contains("statistic")) {
    const json& st = j.at("statistic");
    s.statistic = st.at("kind").get<std::string>();
    if (st.contains("offset")) s.offset = st.at("offset").get<double>();
    if (st.contains("h")) s.h = st.at("h").get<std::vector<double>>();
    s.floor = st.value("floor", 1.0);
  }
  if (s.statistic != "variance" && s.statistic != "mean") {
    throw std::invalid_argument("config: unknown statistic '" + s.statistic + "'");
  }
  return s;
}

json sensor_to(const SensorSpec& s) {
  json r = {{"kind", s.reference}};
  if (s.reference == "discrete_gaussian") r["d"] = s.gaussian_d;
  if (s.reference == "probs") r["probs"] = s.probs;
  json st = {{"kind", s.statistic}, {"floor", s.floor}};
  if (s.offset) st["offset"] = *s.offset;
  if (!s.h.empty()) st["h"] = s.h;
  return {{"alphabet", s.labels}, {"reference", r}, {"statistic", st}};
}

std::string affected_name(AffectedMode m) {
  switch (m) {
    case AffectedMode::all:
      return "all";
    case AffectedMode::random:
      return "random";
    case AffectedMode::fixed:
      return "fixed";
  }
  return "all";
}

std::string schedule_name(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::optimal:
      return "optimal";
    case ScheduleMode::always_confirm:
      return "always_confirm";
    case ScheduleMode::never_confirm:
      return "never_confirm";
  }
  return "optimal";
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  ScenarioConfig c;
  for (const json& s : j.at("sensors")) {
    const std::size_t copies = s.value("copies", std::size_t{1});
    const SensorSpec spec = sensor_from(s);
    for (std::size_t i = 0; i < copies; ++i) c.sensors.push_back(spec);
  }
  if (c.sensors.empty()) throw std::invalid_argument("config: no sensors");
  c.kappa = j.value("kappa", c.kappa);
  c.rho = j.value("rho", c.rho);
  if (j.contains("schedule")) {
    const auto name = j.at("schedule").get<std::string>();
    if (name == "optimal") {
      c.schedule = ScheduleMode::optimal;
    } else if (name == "always_confirm") {
      c.schedule = ScheduleMode::always_confirm;
    } else if (name == "never_confirm") {
      c.schedule = ScheduleMode::never_confirm;
    } else {
      throw std::invalid_argument("config: unknown schedule '" + name + "'");
    }
  }
  if (j.contains("c_s_grid")) c.c_s_grid = j.at("c_s_grid").get<std::vector<double>>();
  if (j.contains("affected")) {
    const json& a = j.at("affected");
    if (a.is_array()) {
      c.affected = AffectedMode::fixed;
      c.affected_sensors = a.get<std::vector<std::size_t>>();
      if (c.affected_sensors.empty()) throw std::invalid_argument("config: affected set must be nonempty");
      for (std::size_t s : c.affected_sensors) {
        if (s >= c.sensors.size()) throw std::invalid_argument("config: affected sensor out of range");
      }
    } else if (a.get<std::string>() == "all") {
      c.affected = AffectedMode::all;
    } else if (a.get<std::string>() == "random") {
      c.affected = AffectedMode::random;
    } else {
      throw std::invalid_argument("config: affected must be 'all', 'random' or a sensor list");
    }
  }
  if (j.contains("t1_grid")) {
    for (const json& t : j.at("t1_grid")) {
      if (t.is_string()) {
        if (t.get<std::string>() != "inf") throw std::invalid_argument("config: t1 entries are integers or \"inf\"");
        c.t1_grid.push_back(std::nullopt);
      } else {
        const auto v = t.get<long long>();
        if (v < 1) throw std::invalid_argument("config: t1 entries must be >= 1");
        c.t1_grid.push_back(static_cast<std::size_t>(v));
      }
    }
  }
  c.post_change_count = j.value("post_change_count", c.post_change_count);
  c.sampler_max_draws = j.value("sampler_max_draws", c.sampler_max_draws);
  c.arl_trials = j.value("arl_trials", c.arl_trials);
  c.wadd_trials_per_cell = j.value("wadd_trials_per_cell", c.wadd_trials_per_cell);
  c.seed = j.value("seed", c.seed);
  if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::size_t>();
  c.threads = j.value("threads", c.threads);
  c.projection_tolerance = j.value("projection_tolerance", c.projection_tolerance);
  if (j.contains("n_max")) c.n_max = j.at("n_max").get<std::size_t>();
  if (j.contains("window_cap")) c.window_cap = j.at("window_cap").get<std::size_t>();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ScenarioConfig& c) {
  json j;
  j["sensors"] = json::array();
  for (const auto& s : c.sensors) j["sensors"].push_back(sensor_to(s));
  j["kappa"] = c.kappa;
  j["rho"] = c.rho;
  j["schedule"] = schedule_name(c.schedule);
  j["c_s_grid"] = c.c_s_grid;
  if (c.affected == AffectedMode::fixed) {
    j["affected"] = c.affected_sensors;
  } else {
    j["affected"] = affected_name(c.affected);
  }
  j["t1_grid"] = json::array();
  for (const auto& t : c.t1_grid) {
    if (t) {
      j["t1_grid"].push_back(*t);
    } else {
      j["t1_grid"].push_back("inf");
    }
  }
  j["post_change_count"] = c.post_change_count;
  j["sampler_max_draws"] = c.sampler_max_draws;
  j["arl_trials"] = c.arl_trials;
  j["wadd_trials_per_cell"] = c.wadd_trials_per_cell;
  j["seed"] = c.seed;
  if (c.max_steps) j["max_steps"] = *c.max_steps;
  j["threads"] = c.threads;
  j["projection_tolerance"] = c.projection_tolerance;
  if (c.n_max) j["n_max"] = *c.n_max;
  if (c.window_cap) j["window_cap"] = *c.window_cap;
  return j.dump(2);
}

ScenarioConfig reduced_reproduction_config() {
  ScenarioConfig c;
  SensorSpec s;
  for (int a = -4; a <= 4; ++a) s.labels.push_back(a);
  s.reference = "discrete_gaussian";
  s.gaussian_d = 1.0;
  s.statistic = "variance";
  s.floor = 1.0;
  c.sensors.assign(3, s);
  c.kappa = 0.25;
  c.rho = 0.2;
  c.c_s_grid = {15.0, 25.0, 35.0, 45.0, 55.0, 65.0};
  c.affected = AffectedMode::all;
  c.t1_grid = {1, 3, 10, 30, 100, 300};
  c.post_change_count = 200;
  c.arl_trials = 1000;
  c.wadd_trials_per_cell = 17;
  c.seed = 20240501;
  return c;
}

}  // namespace nipt
