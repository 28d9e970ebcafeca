#pragma once

// Finite-alphabet probability types shared by every other module.
//
// All divergences are in nats (natural logarithm).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nipt {

/// Tolerance on |sum(p) - 1| accepted when constructing a Pmf.
inline constexpr double kNormalizationTolerance = 1e-12;

/// Ordered set of numeric symbol labels for one sensor.
class Alphabet {
 public:
  explicit Alphabet(std::vector<double> labels);

  /// Labels lo, lo+1, ..., hi.
  static Alphabet integer_range(int lo, int hi);

  std::size_t size() const { return labels_.size(); }
  double label(std::size_t i) const { return labels_.at(i); }
  const std::vector<double>& labels() const { return labels_; }
  std::optional<std::size_t> index_of(double label) const;
  double min_label() const;
  double max_label() const;

  bool operator==(const Alphabet& other) const = default;

 private:
  std::vector<double> labels_;
};

/// Probability mass function over an Alphabet. Immutable.
class Pmf {
 public:
  /// Throws std::invalid_argument on negative entries, length mismatch, or a
  /// sum outside kNormalizationTolerance. Inputs are never renormalized.
  Pmf(Alphabet alphabet, std::vector<double> probs);

  static Pmf uniform(const Alphabet& alphabet);
  static Pmf point_mass(const Alphabet& alphabet, std::size_t index);
  /// f(a) proportional to exp(-a^2 / (2 d^2)).
  static Pmf discrete_gaussian(const Alphabet& alphabet, double d);
  /// Normalizes `weights` (non-negative, positive sum) before constructing.
  static Pmf from_weights(const Alphabet& alphabet, std::span<const double> weights);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  bool strictly_positive() const { return strictly_positive_; }

  double mean() const;
  double variance() const;

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
  bool strictly_positive_ = false;
};

/// Joint pmf over the Cartesian product of sensor alphabets. Dense; only meant
/// for tiny networks (oracles, tests). Index ordering is row-major with the
/// last sensor varying fastest.
class JointPmf {
 public:
  JointPmf(std::vector<Alphabet> factors, std::vector<double> probs);

  static JointPmf product(std::span<const Pmf> factors);

  std::size_t sensors() const { return factors_.size(); }
  const std::vector<Alphabet>& factors() const { return factors_; }
  std::span<const double> probs() const { return probs_; }
  /// Decomposes a dense index into one symbol index per sensor.
  std::vector<std::uint32_t> unravel(std::size_t flat) const;

 private:
  std::vector<Alphabet> factors_;
  std::vector<double> probs_;
};

/// X_k = (X_{1,k}, ..., X_{J,k}), stored as symbol indices.
struct JointSample {
  std::vector<std::uint32_t> symbols;

  bool operator==(const JointSample&) const = default;
};

/// Sparse empirical joint pmf: observed tuple -> probability.
using SparseJointPmf = std::map<std::vector<std::uint32_t>, double>;

/// Per-sensor counts plus the sparse joint tally of a sample window.
class WindowCounts {
 public:
  explicit WindowCounts(std::vector<Alphabet> alphabets);

  /// Throws std::invalid_argument if the sample does not fit the alphabets.
  void append(const JointSample& sample);
  void clear();

  std::size_t length() const { return n_; }
  std::size_t sensors() const { return alphabets_.size(); }
  const std::vector<Alphabet>& alphabets() const { return alphabets_; }
  std::span<const std::uint64_t> counts(std::size_t sensor) const { return counts_.at(sensor); }
  const std::map<std::vector<std::uint32_t>, std::uint64_t>& joint() const { return joint_; }

  /// Checks that per-sensor counts equal the marginal tallies of the joint list.
  bool consistent() const;

 private:
  std::vector<Alphabet> alphabets_;
  std::vector<std::vector<std::uint64_t>> counts_;
  std::map<std::vector<std::uint32_t>, std::uint64_t> joint_;
  std::size_t n_ = 0;
};

struct EmpiricalDistributions {
  std::vector<Pmf> marginals;
  SparseJointPmf joint;
};

/// Sensor marginal of a dense joint pmf. Throws std::out_of_range on a bad index.
Pmf marginal(const JointPmf& joint, std::size_t sensor);

/// I(f||g) in nats with 0 log(0/x) = 0; +inf when f is not absolutely
/// continuous w.r.t. g. Throws std::invalid_argument on alphabet mismatch.
double kl_divergence(const Pmf& f, const Pmf& g);
double kl_divergence(std::span<const double> f, std::span<const double> g);

/// I(f||g) for a sparse joint f against the product of `factors`.
double kl_divergence(const SparseJointPmf& f, std::span<const Pmf> factors);

double l1_distance(const Pmf& f, const Pmf& g);
double l1_distance(std::span<const double> f, std::span<const double> g);

/// Throws std::invalid_argument for an empty window.
EmpiricalDistributions empirical_pmfs(const WindowCounts& window);

}  // namespace nipt
