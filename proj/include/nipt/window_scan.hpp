#pragma once

// Incremental evaluation of
//
//   S_k = max_{tau <= l <= k+1} (k - l + 1) (sum_j q_j(fhat_{j, l..k}) - kappa)
//
// over a subset of sensors. Window counts come from per-sensor prefix counts.
// Candidates are visited in increasing order of a linear upper bound: for
// concave q_j, n q_j(fhat) <= sum_t gbar_j(x_t) where gbar_j is the gradient
// of q_j at f_{j,0} centred under f_{j,0}. Any candidate whose bound falls
// below the incumbent cannot win, so the scan stops early while still
// returning the exact maximum and the smallest maximizing l.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nipt/distributions.hpp"
#include "nipt/statistics.hpp"

namespace nipt {

struct ScanResult {
  double value = 0.0;
  /// Maximizing l (1-based time). Equals k + 1 for the empty window.
  std::size_t start = 1;
  /// k - start + 1.
  std::size_t length = 0;
};

class WindowScanner {
 public:
  /// `window_cap` discards candidates with k - l + 1 > cap. This changes the
  /// statistic and exists only to bound the per-step scan cost in long runs.
  WindowScanner(const NetworkModel& model, std::vector<std::size_t> sensors, double kappa,
                std::optional<std::size_t> window_cap = std::nullopt);

  /// Appends X_{k+1}; only the scanner's own sensors are read.
  void append(const JointSample& sample);
  ScanResult scan() const;
  /// tau <- k + 1: drop every buffered sample.
  void restart();

  std::size_t time() const { return k_; }
  std::size_t origin() const { return tau_; }
  std::size_t buffered() const { return prefix_majorant_.size() - 1; }
  double kappa() const { return kappa_; }
  /// Number of candidates whose exact value was computed in the last scan.
  std::size_t last_evaluations() const { return evaluations_; }

  /// Counts of sensors()[s] over times [l, k]; l in [tau, k+1].
  std::vector<std::uint32_t> window_counts(std::size_t l, std::size_t s) const;
  const std::vector<std::size_t>& sensors() const { return sensors_; }

 private:
  double window_value(std::size_t p) const;

  const NetworkModel* model_;
  std::vector<std::size_t> sensors_;
  std::vector<std::size_t> offsets_;  // start of each sensor's block in a prefix row
  std::size_t width_ = 0;
  double kappa_;
  std::optional<std::size_t> cap_;
  std::vector<std::vector<double>> majorant_;  // per sensor, per symbol

  std::size_t k_ = 0;
  std::size_t tau_ = 1;
  // Row p holds counts of the first p buffered samples.
  std::vector<std::uint32_t> prefix_counts_;
  // prefix_majorant_[p] = sum over the first p samples of (sum_j gbar_j - kappa).
  std::vector<double> prefix_majorant_;
  double abs_total_ = 0.0;
  std::multimap<double, std::size_t> candidates_;  // key prefix_majorant_[p-1] -> p
  std::vector<std::multimap<double, std::size_t>::iterator> handles_;
  std::size_t evicted_ = 0;

  mutable std::vector<std::vector<double>> scratch_;
  mutable std::size_t evaluations_ = 0;
};

}  // namespace nipt
