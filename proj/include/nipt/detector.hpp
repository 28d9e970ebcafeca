#pragma once

// Two-stage network detector. Stage one is the global windowed CUSUM S_k with
// drift -kappa; when it crosses c_s, stage two compares the windowed joint
// empirical pmf against the most likely false alarm f_n* and either confirms
// the alarm or resets (tau <- k + 1).
//
// Time is 1-based: the first sample is X_1.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nipt/distributions.hpp"
#include "nipt/projection.hpp"
#include "nipt/statistics.hpp"
#include "nipt/window_scan.hpp"

namespace nipt {

/// Second-stage thresholds: c_n^D = 0 for n <= n_low, c_d otherwise. An
/// infinite c_d suppresses every alarm it applies to.
class ThresholdSchedule {
 public:
  struct Derived {
    double rho;
    double q_floor;     // min_j q_j_min - kappa
    double lipschitz;   // L = sum_j L_j
    double n_upper;     // N = (1 - rho) c_s / kappa
  };

  static ThresholdSchedule two_level(double c_s, double kappa, std::optional<std::size_t> n_low, double c_d);
  /// c_n^D = 0 for every n (stage two vacuous).
  static ThresholdSchedule always_confirm(double c_s, double kappa);
  /// c_n^D = +inf for every n.
  static ThresholdSchedule never_confirm(double c_s, double kappa);

  double c_s() const { return c_s_; }
  double kappa() const { return kappa_; }
  std::optional<std::size_t> n_low() const { return n_low_; }
  double c_d() const { return c_d_; }
  double threshold(std::size_t n) const { return n_low_ && n <= *n_low_ ? 0.0 : c_d_; }

  const std::optional<Derived>& derived() const { return derived_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend ThresholdSchedule make_schedule(const NetworkModel&, double, double, double);
  ThresholdSchedule(double c_s, double kappa, std::optional<std::size_t> n_low, double c_d)
      : c_s_(c_s), kappa_(kappa), n_low_(n_low), c_d_(c_d) {}

  double c_s_;
  double kappa_;
  std::optional<std::size_t> n_low_;
  double c_d_;
  std::optional<Derived> derived_;
  std::vector<std::string> warnings_;
};

/// Schedule from the asymptotic optimality conditions:
///   q_floor = min_j q_j_min - kappa,  n_low = ceil((1 + rho) c_s / q_floor),
///   c_d = (2 - rho)^2 kappa^2 / (2 (1 - rho)^2 L^2).
/// Throws std::invalid_argument unless 0 < kappa < min_j q_j_min / 2,
/// rho in (0, 1) and (1 + rho) / (1 - rho) <= q_floor / kappa.
ThresholdSchedule make_schedule(const NetworkModel& model, double c_s, double kappa, double rho);

enum class EventKind { quiet, alarm_confirmed, alarm_suppressed };
std::string to_string(EventKind kind);

struct DecisionEvent {
  EventKind kind = EventKind::quiet;
  std::size_t k = 0;
  double statistic = 0.0;  // S_k
  std::size_t window = 0;  // n_k
  double divergence = 0.0;  // D_k, NaN when quiet
  double threshold = 0.0;   // c_{n_k}^D, NaN when quiet
};

struct DetectorOptions {
  std::optional<std::size_t> window_cap;
};

class NiptDetector {
 public:
  /// Copies the schedule; the model and table must outlive the detector.
  /// Throws std::invalid_argument if the table was built for other (c_s, kappa)
  /// or the joint alphabet does not fit a 64-bit code.
  NiptDetector(const NetworkModel& model, const ThresholdSchedule& schedule, const ProjectionTable& table,
               DetectorOptions options = {});

  /// Feeds X_{k+1}. Throws std::out_of_range if an alarm window exceeds the
  /// table's n_max.
  DecisionEvent step(const JointSample& sample);
  /// Back to k = 0, tau = 1.
  void reset();
  /// tau <- k + 1 without touching k (used to keep monitoring after an alarm).
  void restart();

  std::size_t time() const { return scanner_.time(); }
  std::size_t origin() const { return scanner_.origin(); }
  std::size_t buffered() const { return scanner_.buffered(); }
  ScanResult scan() const { return scanner_.scan(); }

  /// I(fhat_{joint, l..k} || prod_j factors_j) for l >= origin(); +inf for an empty window or
  /// when the window hits a zero of the product.
  double window_divergence(std::size_t l, const std::vector<Pmf>& factors) const;

 private:
  const NetworkModel* model_;
  ThresholdSchedule schedule_;
  const ProjectionTable* table_;
  DetectorOptions options_;
  WindowScanner scanner_;
  std::vector<std::uint64_t> radix_;
  std::vector<std::uint64_t> codes_;  // joint code of each buffered sample
  mutable std::vector<std::uint64_t> sort_buffer_;
};

struct RunRecord {
  /// t_S: first time S_k >= c_s.
  std::optional<std::size_t> first_crossing;
  bool first_crossing_confirmed = false;
  /// t_I: the confirmed alarm.
  std::optional<std::size_t> stop;
  std::size_t suppressions = 0;
  std::size_t steps = 0;

  bool censored() const { return !stop.has_value(); }
};

using SampleSource = std::function<JointSample()>;

/// Runs a fresh detector on `source` until a confirmed alarm or max_steps.
RunRecord run_until_alarm(const SampleSource& source, const NetworkModel& model, const ThresholdSchedule& schedule,
                          const ProjectionTable& table, std::size_t max_steps, DetectorOptions options = {});

}  // namespace nipt
