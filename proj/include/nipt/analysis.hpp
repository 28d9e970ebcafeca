#pragma once

// Closed-form bound calculators. All bounds are leading-order asymptotics
// with the vanishing terms dropped; treat them as reference curves.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nipt/statistics.hpp"

namespace nipt {

/// Finite pmf of a random walk increment.
struct StepDistribution {
  std::vector<double> values;  // sorted, distinct
  std::vector<double> probs;

  double mean() const;
  double max_value() const { return values.back(); }
};

/// Builds a StepDistribution from (value, prob) pairs, merging values that
/// agree to 1e-12 relative. Probabilities must sum to 1.
StepDistribution make_step_distribution(std::span<const double> values, std::span<const double> probs);

/// Distribution of sum_j X_j + shift for independent per-sensor variables.
StepDistribution convolve(const std::vector<StepDistribution>& parts, double shift);

enum class StepMode {
  /// Requires mean-type statistics: step = sum_j (h_j(X_j) - E h_j) - kappa.
  exact,
  /// Uses the f0-centred gradient of each q_j as h_j. For mean-type
  /// statistics this is the same as exact; otherwise it is the linear
  /// majorant of the walk and the resulting bound is heuristic.
  linearized,
};

/// Step of the global CUSUM under f0 = prod_j f_{j,0}. Mean is -kappa.
/// Throws std::invalid_argument in exact mode if any statistic is not mean-type.
StepDistribution step_distribution(const NetworkModel& model, double kappa, StepMode mode = StepMode::exact);

/// User-supplied surrogate: step = sum_j h_j(X_j) - kappa with h_j given per
/// symbol of sensor j.
StepDistribution step_distribution(const NetworkModel& model, double kappa,
                                   const std::vector<std::vector<double>>& surrogate);

/// psi(v) = log E exp(v S).
double log_mgf(const StepDistribution& step, double v);

/// Positive root of psi. Throws std::invalid_argument if the step has no
/// positive value or a non-negative mean.
double v_star(const StepDistribution& step, double tolerance = 1e-10);

struct ArlBound {
  double exponent;  // (v* + 2 kappa / L^2) c_s
  double value;     // exp(exponent)
};

ArlBound arl_lower_bound(double v_star, double kappa, double lipschitz, double c_s);

struct WaddBounds {
  double threshold_bound;  // 2 c_s / q_floor
  double gamma_bound;      // log gamma / (q_floor (v*/2 + kappa / L^2))
  double calibrated_c_s;   // log gamma / (v* + 2 kappa / L^2)
};

WaddBounds wadd_bounds(double q_floor, double c_s, double v_star, double kappa, double lipschitz, double gamma);

double gamma_bound(double gamma, double q_floor, double v_star, double kappa, double lipschitz);

/// c_s at which the ARL bound equals gamma.
double calibrate_threshold(double gamma, double v_star, double kappa, double lipschitz);

struct BoundReport {
  double v_star;
  double kappa;
  double lipschitz;
  double q_floor;
  double c_s;
  double gamma;
  ArlBound arl;
  WaddBounds wadd;
  /// The walk step was a surrogate, so the bounds are not guaranteed.
  bool heuristic;
};

BoundReport bound_report(const NetworkModel& model, double kappa, double c_s, double gamma,
                         StepMode mode = StepMode::linearized);

std::string format_report(const BoundReport& report);
std::string report_csv_header();
std::string report_csv_row(const BoundReport& report);

}  // namespace nipt
