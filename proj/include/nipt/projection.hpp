#pragma once

// Information projection of the reference f0 = prod_j f_{j,0} onto the
// superlevel set {f : q(f) >= eta}.
//
// Because f0 is a product and q only reads marginals, the minimizer is a
// product of per-sensor factors f_j(a) ~ f_{j,0}(a) exp(lambda g_j(a)) with
// g_j the gradient of q_j at f_j and one multiplier lambda shared by all
// sensors. The exponent is applied coordinate-wise.

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nipt/distributions.hpp"
#include "nipt/statistics.hpp"

namespace nipt {

enum class ProjectionStatus {
  solved,
  /// Target equals the largest achievable q; factors may contain zeros.
  boundary,
  infeasible,
  /// Target <= q(f0) = 0, so f* = f0.
  reference_feasible,
};

std::string to_string(ProjectionStatus status);
ProjectionStatus projection_status_from_string(const std::string& s);

struct ProjectionOptions {
  /// l1 accuracy of the solution.
  double tolerance = 1e-6;
  double damping = 0.5;
  std::size_t inner_iterations = 1000;
  std::size_t bisection_iterations = 200;
};

struct ProjectionResult {
  std::vector<Pmf> factors;
  double kl_value = 0.0;
  double lambda = 0.0;
  double target = 0.0;
  /// q(f*) actually reached.
  double achieved = 0.0;
  double kkt_residual = 0.0;
  ProjectionStatus status = ProjectionStatus::infeasible;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), detail_(what), residual_(residual) {}
  double residual() const { return residual_; }
  /// Message without the residual suffix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  double residual_;
};

/// sum_j sup_{f_j} q_j(f_j).
double max_achievable_q(const NetworkModel& model);

/// argmin I(f||f0) subject to q(f) >= target.
ProjectionResult project(const NetworkModel& model, double target, const ProjectionOptions& options = {});

/// Solution of the per-sensor stationarity equation for a fixed multiplier:
/// argmin_f I(f||f_{j,0}) - lambda q_j(f).
std::vector<double> tilt(const Sensor& sensor, double lambda, const ProjectionOptions& options = {});

/// sum_j || f_j - normalize(f_{j,0} exp(lambda g_j(f_j))) ||_1.
double kkt_residual(const NetworkModel& model, const std::vector<Pmf>& factors, double lambda);

/// Least-squares multiplier consistent with log(f/f0) = lambda g + const.
double estimate_multiplier(const NetworkModel& model, const std::vector<Pmf>& factors);

/// Table of f_n* for n = 1..n_max with targets eta(n) = c_s / n + kappa.
class ProjectionTable {
 public:
  static constexpr int kFormatVersion = 1;

  static ProjectionTable build(const NetworkModel& model, double c_s, double kappa, std::size_t n_max,
                               const ProjectionOptions& options = {}, std::size_t threads = 1);

  double c_s() const { return c_s_; }
  double kappa() const { return kappa_; }
  std::size_t n_max() const { return entries_.size(); }
  double target(std::size_t n) const { return c_s_ / static_cast<double>(n) + kappa_; }

  /// 1-based. Throws std::out_of_range for n = 0 or n > n_max.
  const ProjectionResult& at(std::size_t n) const;

  /// Structured text: header, then one record per n.
  void write(std::ostream& out) const;
  static ProjectionTable read(std::istream& in, const NetworkModel& model);

 private:
  ProjectionTable(double c_s, double kappa, std::vector<ProjectionResult> entries)
      : c_s_(c_s), kappa_(kappa), entries_(std::move(entries)) {}

  double c_s_;
  double kappa_;
  std::vector<ProjectionResult> entries_;
};

/// Grid-search minimizer used as an independent oracle. Supports at most two
/// sensors with m_j <= 5 and sum m_j <= 12. The coarse grid has spacing
/// `resolution` and is refined around the incumbent until the spacing drops
/// below 1e-10. Throws std::runtime_error if no grid point is feasible.
ProjectionResult brute_force_project(const NetworkModel& model, double target, double resolution);

}  // namespace nipt
