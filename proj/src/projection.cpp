#include "nipt/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nipt/parallel.hpp"

namespace nipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double feasibility_slack(double qmax) { return 1e-12 * (1.0 + std::abs(qmax)); }

// normalize(f0 * exp(lambda * g)), evaluated in the log domain.
void exponential_tilt(std::span<const double> log_f0, std::span<const double> grad, double lambda,
                      std::span<double> out) {
  double top = -kInf;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = log_f0[i] + lambda * grad[i];
    top = std::max(top, out[i]);
  }
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : out) x /= total;
}

// Solves f = normalize(f0 exp(lambda grad q(f))) for one sensor, warm-starting
// from the previous solution.
class SensorTilt {
 public:
  explicit SensorTilt(const Sensor& sensor)
      : sensor_(&sensor),
        f_(sensor.reference.probs().begin(), sensor.reference.probs().end()),
        log_f0_(f_.size()),
        grad_(f_.size()),
        next_(f_.size()) {
    for (std::size_t i = 0; i < f_.size(); ++i) log_f0_[i] = std::log(f_[i]);
    if (sensor.statistic.is_linear()) sensor.statistic.gradient(f_, grad_);
  }

  const std::vector<double>& solve(double lambda, const ProjectionOptions& options) {
    const auto& stat = sensor_->statistic;
    if (stat.is_linear()) {
      exponential_tilt(log_f0_, grad_, lambda, f_);
      return f_;
    }
    if (stat.kind() == StatisticKind::variance) {
      solve_variance(lambda);
      return f_;
    }
    const double tol = options.tolerance / 10.0;
    const double beta = options.damping;
    for (std::size_t it = 0; it < options.inner_iterations; ++it) {
      stat.gradient(f_, grad_);
      exponential_tilt(log_f0_, grad_, lambda, next_);
      double diff = 0.0;
      for (std::size_t i = 0; i < f_.size(); ++i) {
        const double updated = (1.0 - beta) * f_[i] + beta * next_[i];
        diff += std::abs(updated - f_[i]);
        f_[i] = updated;
      }
      if (diff <= tol) return f_;
    }
    mirror_descent(lambda, options);
    return f_;
  }

 private:
  // The variance gradient is a^2 - 2 mu a, so the fixed point is the root of
  // mu = mean(f0 exp(lambda (a^2 - 2 mu a))). The right side decreases in mu,
  // which makes the root unique and bisection safe.
  void solve_variance(double lambda) {
    const auto& a = sensor_->statistic.alphabet().labels();
    const std::size_t m = a.size();
    auto tilted_mean = [&](double mu) {
      for (std::size_t i = 0; i < m; ++i) grad_[i] = a[i] * a[i] - 2.0 * mu * a[i];
      exponential_tilt(log_f0_, grad_, lambda, next_);
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += next_[i] * a[i];
      return mean;
    };
    double lo = a.front();
    double hi = a.back();
    for (double x : a) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (tilted_mean(mid) > mid) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    tilted_mean(0.5 * (lo + hi));
    f_ = next_;
  }

  // Objective minimized by the fixed point: I(f||f0) - lambda q(f).
  double objective(std::span<const double> f, double lambda) const {
    double kl = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] > 0.0) kl += f[i] * (std::log(f[i]) - log_f0_[i]);
    }
    return kl - lambda * sensor_->statistic.eval(f);
  }

  // Fallback when the damped iteration does not settle: entropic mirror
  // descent on the same objective with a backtracking step.
  void mirror_descent(double lambda, const ProjectionOptions& options) {
    const auto& stat = sensor_->statistic;
    const std::size_t m = f_.size();
    std::vector<double> candidate(m);
    double step = 1.0;
    double value = objective(f_, lambda);
    double residual = kInf;
    for (std::size_t it = 0; it < 100 * options.inner_iterations; ++it) {
      stat.gradient(f_, grad_);
      exponential_tilt(log_f0_, grad_, lambda, next_);
      residual = l1_distance(f_, next_);
      if (residual <= options.tolerance / 5.0) return;
      for (;;) {
        double top = -kInf;
        for (std::size_t i = 0; i < m; ++i) {
          candidate[i] = (1.0 - step) * std::log(std::max(f_[i], 1e-300)) +
                         step * std::log(std::max(next_[i], 1e-300));
          top = std::max(top, candidate[i]);
        }
        double total = 0.0;
        for (double& c : candidate) {
          c = std::exp(c - top);
          total += c;
        }
        for (double& c : candidate) c /= total;
        const double trial = objective(candidate, lambda);
        if (trial <= value || step < 1e-12) {
          value = trial;
          f_ = candidate;
          step = std::min(1.0, 2.0 * step);
          break;
        }
        step *= 0.5;
      }
    }
    throw ConvergenceError("projection inner iteration did not converge at lambda " +
                               std::to_string(lambda),
                           residual);
  }

  const Sensor* sensor_;
  std::vector<double> f_;
  std::vector<double> log_f0_;
  std::vector<double> grad_;
  std::vector<double> next_;
};

// sup q_j and a maximizer; closed form when the statistic provides one,
// otherwise the limit of the tilted solutions as lambda grows.
struct SensorMaximum {
  double value;
  std::vector<double> argmax;
};

SensorMaximum sensor_maximum(const Sensor& sensor) {
  const auto& stat = sensor.statistic;
  if (stat.max_value() && stat.maximizer()) return {*stat.max_value(), *stat.maximizer()};
  ProjectionOptions options;
  options.tolerance = 1e-10;
  SensorTilt solver(sensor);
  double lambda = 1.0;
  std::vector<double> f = solver.solve(lambda, options);
  double prev = stat.eval(f);
  while (lambda < 1e12) {
    lambda *= 4.0;
    f = solver.solve(lambda, options);
    const double cur = stat.eval(f);
    if (std::abs(cur - prev) <= 1e-13 * (1.0 + std::abs(cur))) {
      prev = cur;
      break;
    }
    prev = cur;
  }
  return {stat.max_value().value_or(prev), f};
}

ProjectionResult reference_result(const NetworkModel& model, double target) {
  ProjectionResult r;
  r.factors = model.references();
  r.kl_value = 0.0;
  r.lambda = 0.0;
  r.target = target;
  r.achieved = 0.0;
  r.kkt_residual = 0.0;
  r.status = ProjectionStatus::reference_feasible;
  return r;
}

ProjectionResult project_impl(const NetworkModel& model, double target, double qmax,
                              const ProjectionOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("projection tolerance must be positive");
  if (target <= 0.0) return reference_result(model, target);

  ProjectionResult r;
  r.target = target;
  if (target > qmax + feasibility_slack(qmax)) {
    r.factors = model.references();
    r.kl_value = kInf;
    r.lambda = kInf;
    r.achieved = qmax;
    r.status = ProjectionStatus::infeasible;
    return r;
  }
  if (target >= qmax - feasibility_slack(qmax)) {
    r.status = ProjectionStatus::boundary;
    r.lambda = kInf;
    r.achieved = 0.0;
    r.kl_value = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) {
      auto best = sensor_maximum(model.sensor(j));
      Pmf f(model.alphabet(j), std::move(best.argmax));
      r.achieved += model.statistic(j).eval(f);
      r.kl_value += kl_divergence(f, model.reference(j));
      r.factors.push_back(std::move(f));
    }
    r.kkt_residual = 0.0;
    return r;
  }

  std::vector<SensorTilt> solvers;
  solvers.reserve(model.size());
  for (std::size_t j = 0; j < model.size(); ++j) solvers.emplace_back(model.sensor(j));
  auto total_q = [&](double lambda, const ProjectionOptions& opts) {
    double q = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) q += model.statistic(j).eval(solvers[j].solve(lambda, opts));
    return q;
  };

  // q(f(lambda)) is non-decreasing in lambda; bracket the root, then bisect.
  double lo = 0.0;
  double hi = 1.0;
  double q_hi = total_q(hi, options);
  while (q_hi < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e100) throw ConvergenceError("could not bracket the projection multiplier", target - q_hi);
    q_hi = total_q(hi, options);
  }
  const double q_tol = 1e-3 * options.tolerance;
  for (std::size_t it = 0; it < options.bisection_iterations; ++it) {
    if (q_hi - target <= q_tol || hi - lo <= 1e-15 * hi) break;
    const double mid = 0.5 * (lo + hi);
    const double q_mid = total_q(mid, options);
    if (q_mid >= target) {
      hi = mid;
      q_hi = q_mid;
    } else {
      lo = mid;
    }
  }

  ProjectionOptions polish = options;
  polish.tolerance = options.tolerance * 1e-3;
  r.status = ProjectionStatus::solved;
  r.lambda = hi;
  r.achieved = 0.0;
  r.kl_value = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    Pmf f(model.alphabet(j), solvers[j].solve(hi, polish));
    r.achieved += model.statistic(j).eval(f);
    r.kl_value += kl_divergence(f, model.reference(j));
    r.factors.push_back(std::move(f));
  }
  r.kkt_residual = kkt_residual(model, r.factors, r.lambda);
  if (r.kkt_residual > options.tolerance) {
    throw ConvergenceError("projection KKT residual above tolerance", r.kkt_residual);
  }
  return r;
}

}  // namespace

std::string to_string(ProjectionStatus status) {
  switch (status) {
    case ProjectionStatus::solved:
      return "solved";
    case ProjectionStatus::boundary:
      return "boundary";
    case ProjectionStatus::infeasible:
      return "infeasible";
    case ProjectionStatus::reference_feasible:
      return "reference-feasible";
  }
  return "unknown";
}

ProjectionStatus projection_status_from_string(const std::string& s) {
  for (auto st : {ProjectionStatus::solved, ProjectionStatus::boundary, ProjectionStatus::infeasible,
                  ProjectionStatus::reference_feasible}) {
    if (to_string(st) == s) return st;
  }
  throw std::invalid_argument("unknown projection status '" + s + "'");
}

double max_achievable_q(const NetworkModel& model) {
  double q = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) q += sensor_maximum(model.sensor(j)).value;
  return q;
}

ProjectionResult project(const NetworkModel& model, double target, const ProjectionOptions& options) {
  return project_impl(model, target, max_achievable_q(model), options);
}

std::vector<double> tilt(const Sensor& sensor, double lambda, const ProjectionOptions& options) {
  SensorTilt solver(sensor);
  return solver.solve(lambda, options);
}

double kkt_residual(const NetworkModel& model, const std::vector<Pmf>& factors, double lambda) {
  if (!std::isfinite(lambda)) return 0.0;
  double residual = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const auto f = factors.at(j).probs();
    const auto f0 = model.reference(j).probs();
    std::vector<double> log_f0(f0.size()), grad(f0.size()), t(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) log_f0[i] = std::log(f0[i]);
    model.statistic(j).gradient(f, grad);
    exponential_tilt(log_f0, grad, lambda, t);
    residual += l1_distance(f, t);
  }
  return residual;
}

double estimate_multiplier(const NetworkModel& model, const std::vector<Pmf>& factors) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const auto f = factors.at(j).probs();
    const auto f0 = model.reference(j).probs();
    std::vector<double> grad(f.size());
    model.statistic(j).gradient(f, grad);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] <= 0.0) continue;
      a.push_back(std::log(f[i] / f0[i]));
      b.push_back(grad[i]);
    }
    if (a.size() < 2) continue;
    const double abar = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    const double bbar = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - abar) * (b[i] - bbar);
      den += (b[i] - bbar) * (b[i] - bbar);
    }
  }
  return den > 0.0 ? std::max(0.0, num / den) : 0.0;
}

// ---------------------------------------------------------------------------
// ProjectionTable

ProjectionTable ProjectionTable::build(const NetworkModel& model, double c_s, double kappa,
                                       std::size_t n_max, const ProjectionOptions& options,
                                       std::size_t threads) {
  if (n_max < 1) throw std::invalid_argument("projection table needs n_max >= 1");
  if (!(c_s >= 0.0) || !std::isfinite(c_s)) throw std::invalid_argument("c_s must be finite and >= 0");
  if (!std::isfinite(kappa)) throw std::invalid_argument("kappa must be finite");
  const double qmax = max_achievable_q(model);
  std::vector<ProjectionResult> entries(n_max);
  parallel_for(n_max, threads, [&](std::size_t i) {
    const std::size_t n = i + 1;
    const double eta = c_s / static_cast<double>(n) + kappa;
    try {
      entries[i] = project_impl(model, eta, qmax, options);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("table entry n=" + std::to_string(n) + ": " + e.detail(), e.residual());
    }
  });
  return ProjectionTable(c_s, kappa, std::move(entries));
}

const ProjectionResult& ProjectionTable::at(std::size_t n) const {
  if (n == 0 || n > entries_.size()) {
    throw std::out_of_range("window length " + std::to_string(n) + " outside projection table [1, " +
                            std::to_string(entries_.size()) + "]");
  }
  return entries_[n - 1];
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& token) {
  std::size_t pos = 0;
  const double x = std::stod(token, &pos);
  if (pos != token.size()) throw std::invalid_argument("bad number '" + token + "'");
  return x;
}

}  // namespace

void ProjectionTable::write(std::ostream& out) const {
  out << "nipt-projection-table " << kFormatVersion << '\n';
  out << "c_s " << format_double(c_s_) << '\n';
  out << "kappa " << format_double(kappa_) << '\n';
  out << "n_max " << entries_.size() << '\n';
  const auto& first = entries_.front().factors;
  out << "sensors " << first.size();
  for (const auto& f : first) out << ' ' << f.size();
  out << '\n';
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    out << (i + 1) << ' ' << to_string(e.status) << ' ' << format_double(e.lambda) << ' '
        << format_double(e.kl_value) << ' ' << format_double(e.achieved) << ' '
        << format_double(e.kkt_residual);
    for (const auto& f : e.factors) {
      out << " |";
      for (double p : f.probs()) out << ' ' << format_double(p);
    }
    out << '\n';
  }
}

ProjectionTable ProjectionTable::read(std::istream& in, const NetworkModel& model) {
  auto fail = [](const std::string& why) -> void {
    throw std::runtime_error("malformed projection table: " + why);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "nipt-projection-table") fail("missing header");
  if (version != kFormatVersion) fail("unsupported version " + std::to_string(version));
  std::string key, value;
  double c_s = 0.0, kappa = 0.0;
  std::size_t n_max = 0, sensors = 0;
  in >> key >> value;
  if (key != "c_s") fail("expected c_s");
  c_s = parse_double(value);
  in >> key >> value;
  if (key != "kappa") fail("expected kappa");
  kappa = parse_double(value);
  in >> key >> n_max;
  if (key != "n_max" || n_max == 0) fail("expected n_max");
  in >> key >> sensors;
  if (key != "sensors" || sensors != model.size()) fail("sensor count does not match model");
  for (std::size_t j = 0; j < sensors; ++j) {
    std::size_t m = 0;
    in >> m;
    if (m != model.alphabet(j).size()) fail("alphabet size mismatch for sensor " + std::to_string(j));
  }
  std::vector<ProjectionResult> entries(n_max);
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < n_max; ++i) {
    if (!std::getline(in, line)) fail("truncated at record " + std::to_string(i + 1));
    std::istringstream rec(line);
    std::size_t n = 0;
    std::string status, lambda, kl, achieved, residual;
    rec >> n >> status >> lambda >> kl >> achieved >> residual;
    if (!rec || n != i + 1) fail("bad record " + std::to_string(i + 1));
    auto& e = entries[i];
    e.status = projection_status_from_string(status);
    e.lambda = parse_double(lambda);
    e.kl_value = parse_double(kl);
    e.achieved = parse_double(achieved);
    e.kkt_residual = parse_double(residual);
    e.target = c_s / static_cast<double>(n) + kappa;
    for (std::size_t j = 0; j < sensors; ++j) {
      std::string bar;
      rec >> bar;
      if (bar != "|") fail("missing factor separator in record " + std::to_string(n));
      std::vector<double> p(model.alphabet(j).size());
      for (double& x : p) {
        std::string tok;
        rec >> tok;
        x = parse_double(tok);
      }
      if (!rec) fail("short factor in record " + std::to_string(n));
      e.factors.emplace_back(model.alphabet(j), std::move(p));
    }
  }
  return ProjectionTable(c_s, kappa, std::move(entries));
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

struct GridSet {
  std::size_t m = 0;
  std::vector<double> f;  // flat, m entries per point
  std::vector<double> q;
  std::vector<double> kl;

  std::size_t size() const { return q.size(); }
  std::span<const double> point(std::size_t i) const { return {f.data() + i * m, m}; }

  void add(const Sensor& sensor, std::span<const double> p) {
    f.insert(f.end(), p.begin(), p.end());
    q.push_back(sensor.statistic.eval(p));
    kl.push_back(kl_divergence(p, sensor.reference.probs()));
  }
};

GridSet coarse_grid(const Sensor& sensor, double resolution) {
  const std::size_t m = sensor.reference.size();
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / resolution));
  if (steps < 1) throw std::invalid_argument("grid resolution must be <= 1");
  double count = 1.0;
  for (std::size_t i = 1; i < m; ++i) count = count * static_cast<double>(steps + i) / static_cast<double>(i);
  if (count > 6e6) throw std::invalid_argument("grid too large for brute-force projection");
  GridSet grid;
  grid.m = m;
  std::vector<std::size_t> parts(m, 0);
  std::vector<double> p(m);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == m) {
      parts[i] = left;
      for (std::size_t k = 0; k < m; ++k) p[k] = static_cast<double>(parts[k]) / static_cast<double>(steps);
      grid.add(sensor, p);
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      parts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, steps);
  return grid;
}

GridSet local_grid(const Sensor& sensor, std::span<const double> center, double step, int half_width) {
  const std::size_t m = center.size();
  GridSet grid;
  grid.m = m;
  std::vector<int> offset(m - 1, -half_width);
  std::vector<double> p(m);
  for (;;) {
    double rest = 1.0;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      p[i] = center[i] + offset[i] * step;
      if (p[i] < 0.0) ok = false;
      rest -= p[i];
    }
    p[m - 1] = rest;
    if (ok && rest >= 0.0) grid.add(sensor, p);
    std::size_t i = 0;
    while (i + 1 < m && ++offset[i] > half_width) offset[i++] = -half_width;
    if (i + 1 == m) break;
  }
  return grid;
}

struct Incumbent {
  std::size_t first = 0;
  std::size_t second = 0;
  double kl = kInf;
};

// Best pair (a from `one`, b from `two`) with q_a + q_b >= target. With one
// sensor, `two` holds a single zero point.
Incumbent best_pair(const GridSet& one, const GridSet& two, double target) {
  std::vector<std::size_t> order(two.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return two.q[a] < two.q[b]; });
  std::vector<double> sorted_q(order.size());
  std::vector<std::size_t> suffix_best(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted_q[i] = two.q[order[i]];
  for (std::size_t i = order.size(); i-- > 0;) {
    suffix_best[i] = order[i];
    if (i + 1 < order.size() && two.kl[suffix_best[i + 1]] < two.kl[order[i]]) suffix_best[i] = suffix_best[i + 1];
  }
  Incumbent best;
  for (std::size_t a = 0; a < one.size(); ++a) {
    const auto it = std::lower_bound(sorted_q.begin(), sorted_q.end(), target - one.q[a]);
    if (it == sorted_q.end()) continue;
    const std::size_t b = suffix_best[static_cast<std::size_t>(it - sorted_q.begin())];
    const double total = one.kl[a] + two.kl[b];
    if (total < best.kl) best = {a, b, total};
  }
  return best;
}

}  // namespace

ProjectionResult brute_force_project(const NetworkModel& model, double target, double resolution) {
  if (model.size() > 2) throw std::invalid_argument("brute-force projection supports at most 2 sensors");
  if (model.total_symbols() > 12) throw std::invalid_argument("brute-force projection needs sum m_j <= 12");
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (model.alphabet(j).size() > 5) throw std::invalid_argument("brute-force projection needs m_j <= 5");
  }
  if (!(resolution > 0.0 && resolution <= 1.0)) throw std::invalid_argument("bad grid resolution");
  if (target <= 0.0) return reference_result(model, target);

  const bool pair = model.size() == 2;
  // Dummy second sensor: a single point contributing nothing.
  GridSet zero;
  zero.m = 0;
  zero.q.push_back(0.0);
  zero.kl.push_back(0.0);

  GridSet g1 = coarse_grid(model.sensor(0), resolution);
  GridSet g2 = pair ? coarse_grid(model.sensor(1), resolution) : zero;
  Incumbent inc = best_pair(g1, g2, target);
  if (!std::isfinite(inc.kl)) throw std::runtime_error("grid resolution too coarse: no feasible point");

  std::vector<double> p1(g1.point(inc.first).begin(), g1.point(inc.first).end());
  std::vector<double> p2 = pair ? std::vector<double>(g2.point(inc.second).begin(), g2.point(inc.second).end())
                                : std::vector<double>{};
  double best_kl = inc.kl;
  constexpr int kHalfWidth = 10;
  for (double step = resolution / 5.0; step >= 1e-10; step /= 5.0) {
    GridSet l1 = local_grid(model.sensor(0), p1, step, kHalfWidth);
    GridSet l2 = pair ? local_grid(model.sensor(1), p2, step, kHalfWidth) : zero;
    const Incumbent local = best_pair(l1, l2, target);
    if (!std::isfinite(local.kl) || local.kl > best_kl) continue;
    best_kl = local.kl;
    p1.assign(l1.point(local.first).begin(), l1.point(local.first).end());
    if (pair) p2.assign(l2.point(local.second).begin(), l2.point(local.second).end());
  }

  ProjectionResult r;
  r.target = target;
  r.status = ProjectionStatus::solved;
  // Grid points may sum to 1 only up to accumulated rounding.
  r.factors.push_back(Pmf::from_weights(model.alphabet(0), p1));
  if (pair) r.factors.push_back(Pmf::from_weights(model.alphabet(1), p2));
  r.achieved = global_eval(model, r.factors);
  r.kl_value = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) r.kl_value += kl_divergence(r.factors[j], model.reference(j));
  r.lambda = estimate_multiplier(model, r.factors);
  r.kkt_residual = kkt_residual(model, r.factors, r.lambda);
  return r;
}

}  // namespace nipt
