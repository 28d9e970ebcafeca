#pragma once

// Local statistics q_j (concave, Lipschitz in l1) and the additive global
// statistic q = sum_j q_j over the marginals.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nipt/distributions.hpp"

namespace nipt {

enum class StatisticKind { mean, variance, custom };

/// A concave functional on one sensor's simplex together with its gradient,
/// an l1 Lipschitz constant L_j and the post-change floor q_j_min.
///
/// Gradients are only defined up to an additive constant; every built-in
/// constructor returns the representative whose expectation under the
/// reference pmf f_{j,0} is zero.
class LocalStatistic {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

  struct Definition {
    std::string name;
    StatisticKind kind = StatisticKind::custom;
    Alphabet alphabet;
    EvalFn eval;
    GradientFn gradient;
    double lipschitz = 0.0;
    std::optional<double> floor;
    /// sup of eval over the simplex, when known in closed form.
    std::optional<double> max_value;
    /// KL-closest (to the reference) maximizer of eval, when known.
    std::optional<std::vector<double>> maximizer;
  };

  explicit LocalStatistic(Definition def);

  const std::string& name() const { return def_.name; }
  StatisticKind kind() const { return def_.kind; }
  /// Gradient independent of f (mean-type); the I-projection is an exact tilt.
  bool is_linear() const { return def_.kind == StatisticKind::mean; }
  const Alphabet& alphabet() const { return def_.alphabet; }
  double lipschitz() const { return def_.lipschitz; }
  std::optional<double> floor() const { return def_.floor; }
  std::optional<double> max_value() const { return def_.max_value; }
  const std::optional<std::vector<double>>& maximizer() const { return def_.maximizer; }

  double eval(std::span<const double> f) const { return def_.eval(f); }
  double eval(const Pmf& f) const;
  void gradient(std::span<const double> f, std::span<double> out) const { def_.gradient(f, out); }
  std::vector<double> gradient(const Pmf& f) const;

  /// Copy with a different post-change floor.
  LocalStatistic with_floor(double floor) const;

 private:
  Definition def_;
};

/// q(f) = sum_a h(a) f(a) - sum_a h(a) f0(a). Throws on constant h.
LocalStatistic make_mean_statistic(std::span<const double> h, const Pmf& f0,
                                   std::optional<double> floor = std::nullopt);

/// q(f) = Var_f(X) - offset on the numeric labels of f0's alphabet.
LocalStatistic make_variance_statistic(const Pmf& f0, double offset,
                                       std::optional<double> floor = std::nullopt);
/// Same with offset = Var_{f0}, so that q(f0) = 0.
LocalStatistic make_centred_variance_statistic(const Pmf& f0, std::optional<double> floor = std::nullopt);

struct Sensor {
  Pmf reference;
  LocalStatistic statistic;
};

/// J sensors with strictly positive reference pmfs and normalized statistics.
class NetworkModel {
 public:
  /// Throws std::invalid_argument if J = 0, a reference pmf has a zero entry,
  /// alphabets disagree, or |q_j(f_{j,0})| > 1e-9.
  explicit NetworkModel(std::vector<Sensor> sensors);

  std::size_t size() const { return sensors_.size(); }
  const Sensor& sensor(std::size_t j) const { return sensors_.at(j); }
  const Alphabet& alphabet(std::size_t j) const { return sensors_.at(j).reference.alphabet(); }
  const Pmf& reference(std::size_t j) const { return sensors_.at(j).reference; }
  const LocalStatistic& statistic(std::size_t j) const { return sensors_.at(j).statistic; }
  std::vector<Pmf> references() const;
  std::vector<Alphabet> alphabets() const;

  /// L = sum_j L_j.
  double lipschitz_sum() const;
  /// min_j q_j_min; throws std::logic_error if any floor is unset.
  double min_floor() const;
  /// sum_j m_j.
  std::size_t total_symbols() const;
  /// m = prod_j m_j (as a double, it can be huge).
  double joint_size() const;

 private:
  std::vector<Sensor> sensors_;
};

/// sum_j q_j(f_j). Throws std::invalid_argument on arity/alphabet mismatch.
double global_eval(const NetworkModel& model, std::span<const Pmf> marginals);

struct StatisticCheck {
  double worst_concavity_gap = 0.0;   // max of alpha q(f) + (1-alpha) q(g) - q(mix)
  double worst_lipschitz_excess = 0.0;  // max of |q(f)-q(g)| - L ||f-g||_1
  double worst_gradient_error = 0.0;  // max relative directional-derivative error
  bool passed = true;
};

/// Randomized check of concavity, the Lipschitz bound and the gradient against
/// central finite differences along simplex-tangent directions.
StatisticCheck check_statistic(const LocalStatistic& statistic, std::size_t trials,
                               std::uint64_t seed, double slack = 1e-9);

}  // namespace nipt
