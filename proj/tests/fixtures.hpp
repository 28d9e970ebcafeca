#pragma once

#include <vector>

#include "nipt/distributions.hpp"
#include "nipt/statistics.hpp"

namespace fixture {

// One sensor on {-1, 1}, uniform reference, q = mean.
inline nipt::Sensor binary_mean_sensor(double floor = 1.0) {
  const nipt::Alphabet a({-1.0, 1.0});
  const nipt::Pmf f0 = nipt::Pmf::uniform(a);
  const std::vector<double> h{-1.0, 1.0};
  return {f0, nipt::make_mean_statistic(h, f0, floor)};
}

// One sensor on {0, 1} with reference (1 - p, p), q(f) = f(1) - p.
inline nipt::Sensor bernoulli_sensor(double p, double floor = 0.1) {
  const nipt::Alphabet a({0.0, 1.0});
  const nipt::Pmf f0(a, {1.0 - p, p});
  const std::vector<double> h{0.0, 1.0};
  return {f0, nipt::make_mean_statistic(h, f0, floor)};
}

inline nipt::Sensor variance_sensor(int lo, int hi, double d = 1.0, double floor = 1.0) {
  const nipt::Alphabet a = nipt::Alphabet::integer_range(lo, hi);
  const nipt::Pmf f0 = nipt::Pmf::discrete_gaussian(a, d);
  return {f0, nipt::make_centred_variance_statistic(f0, floor)};
}

inline nipt::NetworkModel copies(const nipt::Sensor& s, std::size_t n) {
  return nipt::NetworkModel(std::vector<nipt::Sensor>(n, s));
}

}  // namespace fixture
