#include <cmath>
#include <limits>

#include <doctest.h>

#include "fixtures.hpp"
#include "nipt/baselines.hpp"
#include "nipt/rng.hpp"
#include "oracles.hpp"

using namespace nipt;

namespace {

double bernoulli_kl(double a, double b) {
  double d = 0.0;
  if (a > 0.0) d += a * std::log(a / b);
  if (a < 1.0) d += (1 - a) * std::log((1 - a) / (1 - b));
  return d;
}

}  // namespace

TEST_CASE("SUM CUSUM small example") {
  const NetworkModel model({fixture::binary_mean_sensor(), fixture::binary_mean_sensor()});
  SumCusum sum(model);
  CHECK(sum.step({{1, 0}}) == 1.0);
  CHECK(sum.step({{1, 1}}) == 3.0);
  CHECK(sum.step({{0, 1}}) == 3.0);  // 1 + 2
  CHECK(sum.local()[0].value == 1.0);
  CHECK(sum.local()[0].start == 1);
  CHECK(sum.local()[1].start == 2);
  CHECK(sum.value() == 3.0);
}

TEST_CASE("SUM CUSUM equals per-sensor definitional maxima") {
  const auto sensor = fixture::variance_sensor(-2, 2);
  const auto model = fixture::copies(sensor, 3);
  const NetworkModel single({sensor});
  Rng rng(4);
  const auto cdf = cumulative(sensor.reference.probs());
  std::vector<std::vector<JointSample>> per(3);
  SumCusum sum(model);
  std::size_t mismatches = 0;
  for (std::size_t k = 1; k <= 400; ++k) {
    JointSample x{{0, 0, 0}};
    for (std::size_t j = 0; j < 3; ++j) {
      x.symbols[j] = static_cast<std::uint32_t>(rng.categorical(cdf));
      per[j].push_back({{x.symbols[j]}});
    }
    const double got = sum.step(x);
    double want = 0.0;
    for (std::size_t j = 0; j < 3; ++j) want += oracle::definitional_scan(single, per[j], 1, k, 0.0).value;
    if (std::abs(got - want) > 1e-12 * (1.0 + std::abs(want))) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("m-projection closed form on a binary alphabet") {
  const auto s = fixture::bernoulli_sensor(0.5, 0.1);
  for (double a : {0.0, 0.2, 0.45, 0.59}) {
    const std::vector<double> fhat{1 - a, a};
    const auto r = m_projection(fhat, s.statistic, 0.1);
    CHECK(r.divergence == doctest::Approx(bernoulli_kl(a, 0.6)).epsilon(1e-7));
    CHECK(r.minimizer[1] == doctest::Approx(0.6).epsilon(1e-6));
  }
  const std::vector<double> inside{0.3, 0.7};
  CHECK(m_projection(inside, s.statistic, 0.1).divergence == 0.0);
  CHECK(m_projection(inside, s.statistic, 0.6).divergence == std::numeric_limits<double>::infinity());
}

TEST_CASE("m-projection agrees with a grid search on three letters") {
  const auto s = fixture::variance_sensor(-1, 1, 1.0, 0.3);
  Rng rng(9);
  for (int t = 0; t < 12; ++t) {
    std::vector<double> fhat = dirichlet_point(3, rng);
    const auto r = m_projection(fhat, s.statistic, 0.3);
    const double grid = oracle::grid_m_projection(fhat, s.statistic, 0.3, 400);
    CHECK(r.divergence >= grid - 1e-9);
    CHECK(std::abs(r.divergence - grid) <= 1e-5);
    if (r.divergence > 0.0) CHECK(s.statistic.eval(r.minimizer) >= 0.3 - 1e-6);
  }
}

TEST_CASE("GLRT statistic examples") {
  const NetworkModel model({fixture::bernoulli_sensor(0.5, 0.1)});
  // fhat = (0.2, 0.8) is inside the alternative, so the GLR is n I(fhat || f0).
  CHECK(glrt_statistic({Pmf(model.alphabet(0), {0.2, 0.8})}, 10, model) ==
        doctest::Approx(10 * bernoulli_kl(0.8, 0.5)).epsilon(1e-12));
  // fhat = (0.55, 0.45) is nearer the null than the alternative.
  CHECK(glrt_statistic({Pmf(model.alphabet(0), {0.55, 0.45})}, 10, model) == 0.0);
  // Between: I(fhat || f0) - I(fhat || (0.4, 0.6)).
  CHECK(glrt_statistic({Pmf(model.alphabet(0), {0.42, 0.58})}, 4, model) ==
        doctest::Approx(4 * (bernoulli_kl(0.58, 0.5) - bernoulli_kl(0.58, 0.6))).epsilon(1e-6));
  CHECK_THROWS(glrt_statistic({}, 1, model));

  // Alternative {delta_{+1}} in the binary-mean model: any -1 gives +inf fit.
  const NetworkModel bin({fixture::binary_mean_sensor()});
  const Alphabet& a = bin.alphabet(0);
  CHECK(glrt_statistic({Pmf(a, {0.1, 0.9})}, 5, bin) == 0.0);
  CHECK(glrt_statistic({Pmf(a, {0.0, 1.0})}, 5, bin) == doctest::Approx(5 * std::log(2.0)));
}

TEST_CASE("GLRT scan takes the best window") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  GlrtScan g(model);
  CHECK(g.step({{0}}) == 0.0);
  CHECK(g.step({{1}}) == doctest::Approx(std::log(2.0)));
  CHECK(g.step({{1}}) == doctest::Approx(2 * std::log(2.0)));
  CHECK(g.time() == 3);
}
