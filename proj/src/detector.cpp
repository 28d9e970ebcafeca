#include "nipt/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace nipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> all_sensors(const NetworkModel& model) {
  std::vector<std::size_t> s(model.size());
  std::iota(s.begin(), s.end(), 0);
  return s;
}

}  // namespace

ThresholdSchedule ThresholdSchedule::two_level(double c_s, double kappa, std::optional<std::size_t> n_low,
                                               double c_d) {
  if (!(c_d >= 0.0)) throw std::invalid_argument("second-stage threshold must be >= 0");
  return ThresholdSchedule(c_s, kappa, n_low, c_d);
}

ThresholdSchedule ThresholdSchedule::always_confirm(double c_s, double kappa) {
  return ThresholdSchedule(c_s, kappa, std::numeric_limits<std::size_t>::max(), 0.0);
}

ThresholdSchedule ThresholdSchedule::never_confirm(double c_s, double kappa) {
  return ThresholdSchedule(c_s, kappa, std::nullopt, kInf);
}

ThresholdSchedule make_schedule(const NetworkModel& model, double c_s, double kappa, double rho) {
  if (!(c_s >= 0.0) || !std::isfinite(c_s)) throw std::invalid_argument("c_s must be finite and >= 0");
  const double floor = model.min_floor();
  if (!(kappa > 0.0) || !(kappa < 0.5 * floor)) {
    throw std::invalid_argument("kappa must satisfy 0 < kappa < min_j q_j_min / 2 = " + std::to_string(0.5 * floor));
  }
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  const double q_floor = floor - kappa;
  if ((1.0 + rho) / (1.0 - rho) > q_floor / kappa) {
    throw std::invalid_argument("rho too large: (1 + rho) / (1 - rho) must not exceed q_floor / kappa");
  }
  const double L = model.lipschitz_sum();
  // The small tolerance keeps exact ratios such as 12 / 0.75 from rounding up.
  const double n_low_real = (1.0 + rho) * c_s / q_floor;
  const auto n_low = static_cast<std::size_t>(std::ceil(n_low_real - 1e-9 * (1.0 + n_low_real)));
  const double c_d = (2.0 - rho) * (2.0 - rho) * kappa * kappa / (2.0 * (1.0 - rho) * (1.0 - rho) * L * L);

  ThresholdSchedule s(c_s, kappa, n_low, c_d);
  const double n_upper = (1.0 - rho) * c_s / kappa;
  s.derived_ = ThresholdSchedule::Derived{rho, q_floor, L, n_upper};
  if (n_upper > 0.0) {
    const double needed = model.joint_size() / n_upper * std::log(n_upper + 1.0);
    if (c_d <= needed) {
      s.warnings_.push_back("c_d = " + std::to_string(c_d) + " does not exceed (m/N) log(N+1) = " +
                            std::to_string(needed) + "; the ARL bound's tail assumption does not hold");
    }
  }
  return s;
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::quiet:
      return "quiet";
    case EventKind::alarm_confirmed:
      return "alarm_confirmed";
    case EventKind::alarm_suppressed:
      return "alarm_suppressed";
  }
  return "unknown";
}

NiptDetector::NiptDetector(const NetworkModel& model, const ThresholdSchedule& schedule,
                           const ProjectionTable& table, DetectorOptions options)
    : model_(&model),
      schedule_(schedule),
      table_(&table),
      options_(options),
      scanner_(model, all_sensors(model), schedule.kappa(), options.window_cap) {
  if (table.c_s() != schedule.c_s() || table.kappa() != schedule.kappa()) {
    throw std::invalid_argument("projection table was built for different (c_s, kappa)");
  }
  if (options.window_cap) {
    spdlog::warn("window cap {} restricts the candidate change points; S_k differs from the uncapped statistic",
                 *options.window_cap);
  }
  radix_.resize(model.size());
  long double span = 1.0L;
  for (std::size_t j = model.size(); j-- > 0;) {
    radix_[j] = static_cast<std::uint64_t>(span);
    span *= static_cast<long double>(model.alphabet(j).size());
  }
  if (span > 9.0e18L) throw std::invalid_argument("joint alphabet too large for the detector's sample codes");
}

void NiptDetector::reset() {
  scanner_ = WindowScanner(*model_, all_sensors(*model_), schedule_.kappa(), options_.window_cap);
  codes_.clear();
}

void NiptDetector::restart() {
  scanner_.restart();
  codes_.clear();
}

double NiptDetector::window_divergence(std::size_t l, const std::vector<Pmf>& factors) const {
  const std::size_t k = scanner_.time();
  if (l < scanner_.origin()) throw std::out_of_range("window start precedes the current origin");
  if (l > k) return kInf;
  const std::size_t first = l - scanner_.origin();
  const std::size_t n = k - l + 1;
  sort_buffer_.assign(codes_.begin() + static_cast<std::ptrdiff_t>(first), codes_.end());
  std::sort(sort_buffer_.begin(), sort_buffer_.end());
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < sort_buffer_.size();) {
    std::size_t e = i;
    while (e < sort_buffer_.size() && sort_buffer_[e] == sort_buffer_[i]) ++e;
    const double p = static_cast<double>(e - i) / dn;
    std::uint64_t code = sort_buffer_[i];
    double log_g = 0.0;
    for (std::size_t j = 0; j < radix_.size(); ++j) {
      const auto a = static_cast<std::size_t>(code / radix_[j]);
      code %= radix_[j];
      const double g = factors[j][a];
      if (g == 0.0) return kInf;
      log_g += std::log(g);
    }
    d += p * (std::log(p) - log_g);
    i = e;
  }
  return std::max(d, 0.0);
}

DecisionEvent NiptDetector::step(const JointSample& sample) {
  scanner_.append(sample);
  std::uint64_t code = 0;
  for (std::size_t j = 0; j < radix_.size(); ++j) code += radix_[j] * sample.symbols[j];
  codes_.push_back(code);

  const ScanResult s = scanner_.scan();
  DecisionEvent ev;
  ev.k = scanner_.time();
  ev.statistic = s.value;
  ev.window = s.length;
  ev.divergence = kNaN;
  ev.threshold = kNaN;
  if (s.value < schedule_.c_s()) return ev;

  if (s.length == 0) {
    ev.divergence = kInf;
  } else {
    const ProjectionResult& star = table_->at(s.length);
    if (star.status == ProjectionStatus::infeasible) {
      throw std::logic_error("alarm at window " + std::to_string(s.length) + " with an infeasible projection");
    }
    ev.divergence = window_divergence(s.start, star.factors);
  }
  ev.threshold = schedule_.threshold(s.length);
  const bool confirmed = std::isfinite(ev.threshold) && ev.divergence >= ev.threshold;
  if (confirmed) {
    ev.kind = EventKind::alarm_confirmed;
  } else {
    ev.kind = EventKind::alarm_suppressed;
    restart();
  }
  return ev;
}

RunRecord run_until_alarm(const SampleSource& source, const NetworkModel& model, const ThresholdSchedule& schedule,
                          const ProjectionTable& table, std::size_t max_steps, DetectorOptions options) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  NiptDetector detector(model, schedule, table, options);
  RunRecord rec;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    const DecisionEvent ev = detector.step(source());
    rec.steps = k;
    if (ev.kind == EventKind::quiet) continue;
    if (!rec.first_crossing) {
      rec.first_crossing = k;
      rec.first_crossing_confirmed = ev.kind == EventKind::alarm_confirmed;
    }
    if (ev.kind == EventKind::alarm_confirmed) {
      rec.stop = k;
      return rec;
    }
    ++rec.suppressions;
  }
  return rec;
}

}  // namespace nipt
