#include "nipt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nipt {

namespace {

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::vector<double> centred_gradient(const Sensor& sensor) {
  std::vector<double> g = sensor.statistic.gradient(sensor.reference);
  double centre = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) centre += sensor.reference[i] * g[i];
  for (double& x : g) x -= centre;
  return g;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace

double StepDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
  return m;
}

StepDistribution make_step_distribution(std::span<const double> values, std::span<const double> probs) {
  if (values.size() != probs.size() || values.empty()) throw std::invalid_argument("step: values/probs mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("step: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("step: probabilities do not sum to 1");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  StepDistribution out;
  for (std::size_t i : order) {
    if (probs[i] == 0.0) continue;
    if (!out.values.empty() && same_value(out.values.back(), values[i])) {
      out.probs.back() += probs[i];
    } else {
      out.values.push_back(values[i]);
      out.probs.push_back(probs[i]);
    }
  }
  return out;
}

StepDistribution convolve(const std::vector<StepDistribution>& parts, double shift) {
  std::vector<double> values{shift};
  std::vector<double> probs{1.0};
  for (const auto& part : parts) {
    std::vector<double> v;
    std::vector<double> p;
    v.reserve(values.size() * part.values.size());
    p.reserve(v.capacity());
    for (std::size_t a = 0; a < values.size(); ++a) {
      for (std::size_t b = 0; b < part.values.size(); ++b) {
        v.push_back(values[a] + part.values[b]);
        p.push_back(probs[a] * part.probs[b]);
      }
    }
    StepDistribution merged = make_step_distribution(v, p);
    values = std::move(merged.values);
    probs = std::move(merged.probs);
  }
  return make_step_distribution(values, probs);
}

StepDistribution step_distribution(const NetworkModel& model, double kappa, StepMode mode) {
  std::vector<std::vector<double>> h;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (mode == StepMode::exact && !model.statistic(j).is_linear()) {
      throw std::invalid_argument("exact step distribution needs mean-type statistics; sensor " + std::to_string(j) +
                                  " uses '" + model.statistic(j).name() + "' (use a surrogate)");
    }
    h.push_back(centred_gradient(model.sensor(j)));
  }
  return step_distribution(model, kappa, h);
}

StepDistribution step_distribution(const NetworkModel& model, double kappa,
                                   const std::vector<std::vector<double>>& surrogate) {
  if (surrogate.size() != model.size()) throw std::invalid_argument("surrogate: one vector per sensor");
  std::vector<StepDistribution> parts;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (surrogate[j].size() != model.alphabet(j).size()) throw std::invalid_argument("surrogate: alphabet size");
    parts.push_back(make_step_distribution(surrogate[j], model.reference(j).probs()));
  }
  return convolve(parts, -kappa);
}

double log_mgf(const StepDistribution& step, double v) {
  double top = -std::numeric_limits<double>::infinity();
  for (double s : step.values) top = std::max(top, v * s);
  double total = 0.0;
  for (std::size_t i = 0; i < step.values.size(); ++i) total += step.probs[i] * std::exp(v * step.values[i] - top);
  return top + std::log(total);
}

double v_star(const StepDistribution& step, double tolerance) {
  if (step.values.empty() || !(step.max_value() > 0.0)) {
    throw std::invalid_argument("no positive root; detector never alarms under f0 except via boundary");
  }
  if (!(step.mean() < 0.0)) throw std::invalid_argument("v_star needs a step with negative mean");
  double lo = 0.0;
  double hi = 1.0;
  while (log_mgf(step, hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("v_star: could not bracket the root");
  }
  // psi < 0 on (0, v*) by convexity, so any point with psi < 0 is a valid lower end.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_mgf(step, mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = std::abs(log_mgf(step, lo)) <= std::abs(log_mgf(step, hi)) ? lo : hi;
  if (std::abs(log_mgf(step, root)) > tolerance) {
    throw std::runtime_error("v_star: residual " + fmt(log_mgf(step, root)) + " above tolerance");
  }
  return root;
}

ArlBound arl_lower_bound(double v_star, double kappa, double lipschitz, double c_s) {
  const double exponent = (v_star + 2.0 * kappa / (lipschitz * lipschitz)) * c_s;
  return {exponent, std::exp(exponent)};
}

double gamma_bound(double gamma, double q_floor, double v_star, double kappa, double lipschitz) {
  return std::log(gamma) / (q_floor * (v_star / 2.0 + kappa / (lipschitz * lipschitz)));
}

double calibrate_threshold(double gamma, double v_star, double kappa, double lipschitz) {
  return std::log(gamma) / (v_star + 2.0 * kappa / (lipschitz * lipschitz));
}

WaddBounds wadd_bounds(double q_floor, double c_s, double v_star, double kappa, double lipschitz, double gamma) {
  return {2.0 * c_s / q_floor, gamma_bound(gamma, q_floor, v_star, kappa, lipschitz),
          calibrate_threshold(gamma, v_star, kappa, lipschitz)};
}

BoundReport bound_report(const NetworkModel& model, double kappa, double c_s, double gamma, StepMode mode) {
  BoundReport r{};
  bool all_linear = true;
  for (std::size_t j = 0; j < model.size(); ++j) all_linear = all_linear && model.statistic(j).is_linear();
  r.v_star = v_star(step_distribution(model, kappa, mode));
  r.kappa = kappa;
  r.lipschitz = model.lipschitz_sum();
  r.q_floor = model.min_floor() - kappa;
  r.c_s = c_s;
  r.gamma = gamma;
  r.arl = arl_lower_bound(r.v_star, kappa, r.lipschitz, c_s);
  r.wadd = wadd_bounds(r.q_floor, c_s, r.v_star, kappa, r.lipschitz, gamma);
  r.heuristic = !all_linear;
  return r;
}

std::string format_report(const BoundReport& r) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %s\n", key, value.c_str());
    out += buf;
  };
  line("v_star", fmt(r.v_star));
  line("kappa", fmt(r.kappa));
  line("lipschitz", fmt(r.lipschitz));
  line("q_floor", fmt(r.q_floor));
  line("c_s", fmt(r.c_s));
  line("gamma", fmt(r.gamma));
  line("arl_exponent", fmt(r.arl.exponent));
  line("arl_lower", fmt(r.arl.value));
  line("wadd_upper", fmt(r.wadd.threshold_bound));
  line("gamma_bound", fmt(r.wadd.gamma_bound));
  line("calibrated_c_s", fmt(r.wadd.calibrated_c_s));
  line("caveat", r.heuristic ? "asymptotic; surrogate step, not a strict bound" : "asymptotic");
  return out;
}

std::string report_csv_header() {
  return "v_star,kappa,lipschitz,q_floor,c_s,gamma,arl_exponent,arl_lower,wadd_upper,gamma_bound,calibrated_c_s,"
         "heuristic";
}

std::string report_csv_row(const BoundReport& r) {
  return fmt(r.v_star) + "," + fmt(r.kappa) + "," + fmt(r.lipschitz) + "," + fmt(r.q_floor) + "," + fmt(r.c_s) +
         "," + fmt(r.gamma) + "," + fmt(r.arl.exponent) + "," + fmt(r.arl.value) + "," +
         fmt(r.wadd.threshold_bound) + "," + fmt(r.wadd.gamma_bound) + "," + fmt(r.wadd.calibrated_c_s) + "," +
         (r.heuristic ? "1" : "0");
}

}  // namespace nipt
