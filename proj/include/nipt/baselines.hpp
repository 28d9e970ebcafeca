#pragma once

// Comparison detectors: the SUM-type CUSUM that maximizes each sensor's window
// separately, and a desk-scale GLRT against the alternative q_j >= q_j_min.

#include <cstddef>
#include <span>
#include <vector>

#include "nipt/distributions.hpp"
#include "nipt/projection.hpp"
#include "nipt/statistics.hpp"
#include "nipt/window_scan.hpp"

namespace nipt {

/// sum_j max_{l_j <= k+1} (k - l_j + 1) q_j(fhat_{j, l_j..k}); never resets.
class SumCusum {
 public:
  explicit SumCusum(const NetworkModel& model);

  /// Feeds X_{k+1} and returns the statistic at the new k.
  double step(const JointSample& sample);
  double value() const { return value_; }
  /// Per-sensor maxima from the last step.
  const std::vector<ScanResult>& local() const { return local_; }

 private:
  std::vector<WindowScanner> scanners_;
  std::vector<ScanResult> local_;
  double value_ = 0.0;
};

struct MProjection {
  double divergence = 0.0;  // inf_g I(fhat || g) over q(g) >= floor
  std::vector<double> minimizer;
  double lambda = 0.0;
};

/// Reverse projection of an empirical pmf onto {g : q(g) >= floor}. Zero when
/// fhat is already in the set, +inf when the set is empty.
MProjection m_projection(std::span<const double> fhat, const LocalStatistic& stat, double floor,
                         double tolerance = 1e-7);

/// n sum_j [I(fhat_j || f_{j,0}) - inf_{q_j(g) >= q_j_min} I(fhat_j || g)]^+.
double glrt_statistic(const std::vector<Pmf>& marginals, std::size_t n, const NetworkModel& model);

/// max over windows l..k since the start of the stream of glrt_statistic.
/// Cost grows linearly with k per step.
class GlrtScan {
 public:
  explicit GlrtScan(const NetworkModel& model);

  double step(const JointSample& sample);
  std::size_t time() const { return k_; }

 private:
  const NetworkModel* model_;
  std::vector<JointSample> samples_;
  std::size_t k_ = 0;
};

}  // namespace nipt
