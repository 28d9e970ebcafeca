#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "nipt/distributions.hpp"

namespace nipt {

/// Reproducible generator. Streams are derived by hashing a path of integers
/// (seed, purpose, trial, ...), so every trial owns an independent stream and
/// results do not depend on how trials are scheduled over threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_zero();
  double exponential();
  /// Index i with probability cdf[i] - cdf[i-1]; cdf must end at 1.
  std::size_t categorical(std::span<const double> cdf);
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Cumulative sums of a pmf with the last entry pinned to exactly 1.
std::vector<double> cumulative(std::span<const double> probs);

/// Uniform draw from the simplex (symmetric Dirichlet(1)).
std::vector<double> dirichlet_point(std::size_t m, Rng& rng);
Pmf dirichlet_pmf(const Alphabet& alphabet, Rng& rng);

}  // namespace nipt
