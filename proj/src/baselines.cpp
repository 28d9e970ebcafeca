#include "nipt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nipt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimizes F(g) = I(fhat || g) - lambda q(g) over the simplex by entropic
// mirror descent with backtracking. F is convex because q is concave.
class ReverseTilt {
 public:
  ReverseTilt(std::span<const double> fhat, const LocalStatistic& stat)
      : fhat_(fhat.begin(), fhat.end()), stat_(&stat), g_(fhat.size()), grad_(fhat.size()), c_(fhat.size()) {
    // Start strictly inside the simplex so atoms unseen in fhat can gain mass.
    const double m = static_cast<double>(g_.size());
    for (std::size_t i = 0; i < g_.size(); ++i) g_[i] = 0.9 * fhat_[i] + 0.1 / m;
  }

  const std::vector<double>& solve(double lambda, double tolerance) {
    const std::size_t m = g_.size();
    std::vector<double> trial(m);
    double value = objective(g_, lambda);
    double step = 1.0;
    for (std::size_t it = 0; it < 200000; ++it) {
      stat_->gradient(g_, c_);
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        grad_[i] = -(fhat_[i] > 0.0 ? fhat_[i] / g_[i] : 0.0) - lambda * c_[i];
        mean += g_[i] * grad_[i];
      }
      double residual = 0.0;
      for (std::size_t i = 0; i < m; ++i) residual = std::max(residual, g_[i] * std::abs(grad_[i] - mean));
      if (residual <= tolerance) return g_;
      for (;;) {
        double top = -kInf;
        for (std::size_t i = 0; i < m; ++i) {
          trial[i] = std::log(g_[i]) - step * (grad_[i] - mean);
          top = std::max(top, trial[i]);
        }
        double total = 0.0;
        for (double& t : trial) {
          t = std::max(std::exp(t - top), 1e-300);
          total += t;
        }
        for (double& t : trial) t /= total;
        const double v = objective(trial, lambda);
        if (v <= value) {
          value = v;
          g_.swap(trial);
          step *= 1.5;
          break;
        }
        step *= 0.5;
        if (step < 1e-16) return g_;
      }
    }
    return g_;
  }

  double divergence() const { return objective(g_, 0.0); }

 private:
  double objective(std::span<const double> g, double lambda) const {
    double v = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (fhat_[i] > 0.0) v += fhat_[i] * std::log(fhat_[i] / g[i]);
    }
    return v - lambda * stat_->eval(g);
  }

  std::vector<double> fhat_;
  const LocalStatistic* stat_;
  std::vector<double> g_;
  std::vector<double> grad_;
  std::vector<double> c_;
};

}  // namespace

SumCusum::SumCusum(const NetworkModel& model) {
  for (std::size_t j = 0; j < model.size(); ++j) scanners_.emplace_back(model, std::vector<std::size_t>{j}, 0.0);
  local_.resize(model.size());
}

double SumCusum::step(const JointSample& sample) {
  value_ = 0.0;
  for (std::size_t j = 0; j < scanners_.size(); ++j) {
    scanners_[j].append(sample);
    local_[j] = scanners_[j].scan();
    value_ += local_[j].value;
  }
  return value_;
}

MProjection m_projection(std::span<const double> fhat, const LocalStatistic& stat, double floor, double tolerance) {
  if (fhat.size() != stat.alphabet().size()) throw std::invalid_argument("m_projection: alphabet size mismatch");
  MProjection out;
  if (stat.eval(fhat) >= floor) {
    out.minimizer.assign(fhat.begin(), fhat.end());
    return out;
  }
  if (stat.max_value() && *stat.max_value() < floor) {
    out.divergence = kInf;
    out.lambda = kInf;
    return out;
  }
  ReverseTilt solver(fhat, stat);
  double lo = 0.0;
  double hi = 1.0;
  double q_hi = stat.eval(solver.solve(hi, tolerance));
  while (q_hi < floor) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e40) {
      out.divergence = kInf;
      out.lambda = kInf;
      return out;
    }
    q_hi = stat.eval(solver.solve(hi, tolerance));
  }
  std::vector<double> best = solver.solve(hi, tolerance);
  for (int it = 0; it < 200 && q_hi - floor > tolerance && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::vector<double>& g = solver.solve(mid, tolerance);
    const double q = stat.eval(g);
    if (q >= floor) {
      hi = mid;
      q_hi = q;
      best = g;
    } else {
      lo = mid;
    }
  }
  out.minimizer = best;
  out.lambda = hi;
  for (std::size_t i = 0; i < fhat.size(); ++i) {
    if (fhat[i] > 0.0) out.divergence += fhat[i] * std::log(fhat[i] / best[i]);
  }
  out.divergence = std::max(out.divergence, 0.0);
  return out;
}

double glrt_statistic(const std::vector<Pmf>& marginals, std::size_t n, const NetworkModel& model) {
  if (marginals.size() != model.size()) throw std::invalid_argument("glrt_statistic: one marginal per sensor");
  double total = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const auto& stat = model.statistic(j);
    const double floor = stat.floor().value_or(0.0);
    const double null_fit = kl_divergence(marginals[j], model.reference(j));
    const double alt_fit = m_projection(marginals[j].probs(), stat, floor).divergence;
    total += std::max(0.0, null_fit - alt_fit);
  }
  return static_cast<double>(n) * total;
}

GlrtScan::GlrtScan(const NetworkModel& model) : model_(&model) {}

double GlrtScan::step(const JointSample& sample) {
  samples_.push_back(sample);
  ++k_;
  WindowCounts window(model_->alphabets());
  double best = 0.0;
  for (std::size_t i = samples_.size(); i-- > 0;) {
    window.append(samples_[i]);
    const auto emp = empirical_pmfs(window);
    best = std::max(best, glrt_statistic(emp.marginals, window.length(), *model_));
  }
  return best;
}

}  // namespace nipt
