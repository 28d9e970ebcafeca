#include <cmath>
#include <limits>
#include <stdexcept>

#include <doctest.h>

#include "nipt/distributions.hpp"
#include "nipt/rng.hpp"

using namespace nipt;

namespace {
const Alphabet kBin({0.0, 1.0});
}

TEST_CASE("alphabet validation") {
  CHECK_THROWS_AS(Alphabet({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Alphabet({1.0, 1.0}), std::invalid_argument);
  const Alphabet a = Alphabet::integer_range(-4, 4);
  CHECK(a.size() == 9);
  CHECK(a.label(0) == -4.0);
  CHECK(a.index_of(3.0) == 7);
  CHECK_FALSE(a.index_of(0.5).has_value());
}

TEST_CASE("pmf rejects bad input instead of renormalizing") {
  CHECK_THROWS_AS(Pmf(kBin, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(Pmf(kBin, {-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(Pmf(kBin, {1.0}), std::invalid_argument);
  CHECK_NOTHROW(Pmf(kBin, {0.5, 0.5 + 5e-13}));
  CHECK(Pmf(kBin, {0.5, 0.5}).strictly_positive());
  CHECK_FALSE(Pmf(kBin, {1.0, 0.0}).strictly_positive());
}

TEST_CASE("discrete gaussian on -4..4 is symmetric with variance near d^2") {
  const Pmf g = Pmf::discrete_gaussian(Alphabet::integer_range(-4, 4), 1.0);
  CHECK(g.mean() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g.variance() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(g.strictly_positive());
}

TEST_CASE("marginal examples") {
  const JointPmf u({kBin, kBin}, {0.25, 0.25, 0.25, 0.25});
  const Pmf m1 = marginal(u, 0);
  CHECK(m1[0] == doctest::Approx(0.5));
  CHECK(m1[1] == doctest::Approx(0.5));

  const Pmf a(kBin, {0.3, 0.7});
  const Pmf b(kBin, {0.9, 0.1});
  const std::vector<Pmf> ab{a, b};
  const JointPmf prod = JointPmf::product(ab);
  const Pmf m2 = marginal(prod, 1);
  CHECK(m2[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(m2[1] == doctest::Approx(0.1).epsilon(1e-15));

  // Ordering (00, 01, 10, 11), second sensor.
  const JointPmf j({kBin, kBin}, {0.5, 0.5, 0.0, 0.0});
  const Pmf m = marginal(j, 1);
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[1] == doctest::Approx(0.5));

  CHECK_THROWS_AS(marginal(j, 2), std::out_of_range);
}

TEST_CASE("marginalization consistency on random joints") {
  Rng rng(11);
  const Alphabet three = Alphabet::integer_range(0, 2);
  for (int t = 0; t < 1000; ++t) {
    const JointPmf f({kBin, three}, dirichlet_point(6, rng));
    for (std::size_t s = 0; s < 2; ++s) {
      const Pmf m = marginal(f, s);
      double total = 0.0;
      for (double p : m.probs()) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    const std::vector<Pmf> factors{dirichlet_pmf(kBin, rng), dirichlet_pmf(three, rng)};
    const JointPmf prod = JointPmf::product(factors);
    for (std::size_t s = 0; s < 2; ++s) {
      const Pmf m = marginal(prod, s);
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == doctest::Approx(factors[s][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("kl divergence examples") {
  const Pmf half(kBin, {0.5, 0.5});
  const Pmf left(kBin, {1.0, 0.0});
  CHECK(kl_divergence(half, half) == 0.0);
  CHECK(kl_divergence(left, half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(kl_divergence(half, left) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(kl_divergence(half, Pmf::uniform(Alphabet::integer_range(0, 2))), std::invalid_argument);
}

TEST_CASE("kl divergence is non-negative and zero only on equality") {
  Rng rng(7);
  const Alphabet a = Alphabet::integer_range(0, 4);
  for (int t = 0; t < 10000; ++t) {
    const Pmf f = dirichlet_pmf(a, rng);
    const Pmf g = dirichlet_pmf(a, rng);
    const double d = kl_divergence(f, g);
    CHECK(d >= 0.0);
    if (l1_distance(f, g) > 1e-6) CHECK(d > 0.0);
    CHECK(kl_divergence(f, f) == 0.0);
  }
}

TEST_CASE("sparse joint kl matches dense computation") {
  const Pmf a(kBin, {0.3, 0.7});
  const Pmf b(kBin, {0.6, 0.4});
  const std::vector<Pmf> factors{a, b};
  SparseJointPmf f{{{0, 1}, 0.25}, {{1, 1}, 0.75}};
  const double expected = 0.25 * std::log(0.25 / (0.3 * 0.4)) + 0.75 * std::log(0.75 / (0.7 * 0.4));
  CHECK(kl_divergence(f, factors) == doctest::Approx(expected).epsilon(1e-14));
  const Pmf zero(kBin, {1.0, 0.0});
  const std::vector<Pmf> with_zero{a, zero};
  CHECK(kl_divergence(f, with_zero) == std::numeric_limits<double>::infinity());
}

TEST_CASE("l1 distance examples") {
  const Pmf f(kBin, {0.6, 0.4});
  CHECK(l1_distance(f, f) == 0.0);
  CHECK(l1_distance(Pmf(kBin, {1.0, 0.0}), Pmf(kBin, {0.0, 1.0})) == 2.0);
  CHECK(l1_distance(f, Pmf(kBin, {0.5, 0.5})) == doctest::Approx(0.2));
  CHECK(l1_distance(f, Pmf(kBin, {0.5, 0.5})) == l1_distance(Pmf(kBin, {0.5, 0.5}), f));
}

TEST_CASE("empirical pmfs examples") {
  WindowCounts one({kBin});
  CHECK_THROWS_AS(empirical_pmfs(one), std::invalid_argument);
  for (std::uint32_t s : {0U, 1U, 1U}) one.append(JointSample{{s}});
  const auto e1 = empirical_pmfs(one);
  CHECK(e1.marginals[0][0] == doctest::Approx(1.0 / 3.0));
  CHECK(e1.marginals[0][1] == doctest::Approx(2.0 / 3.0));

  WindowCounts same({kBin, kBin});
  same.append(JointSample{{0, 0}});
  same.append(JointSample{{0, 0}});
  const auto e2 = empirical_pmfs(same);
  CHECK(e2.joint.size() == 1);
  CHECK(e2.joint.at({0, 0}) == 1.0);
  CHECK(e2.marginals[0][0] == 1.0);
  CHECK(e2.marginals[1][0] == 1.0);

  WindowCounts cross({kBin, kBin});
  cross.append(JointSample{{0, 1}});
  cross.append(JointSample{{1, 0}});
  const auto e3 = empirical_pmfs(cross);
  CHECK(e3.joint.size() == 2);
  CHECK(e3.joint.at({0, 1}) == 0.5);
  CHECK(e3.joint.at({1, 0}) == 0.5);
  CHECK(e3.marginals[0][0] == 0.5);
  CHECK(e3.marginals[1][1] == 0.5);
}

TEST_CASE("window counts stay consistent over a random stream") {
  const Alphabet five = Alphabet::integer_range(0, 4);
  WindowCounts w({kBin, five, kBin});
  Rng rng(99);
  for (int k = 0; k < 1000; ++k) {
    w.append(JointSample{{static_cast<std::uint32_t>(rng.below(2)), static_cast<std::uint32_t>(rng.below(5)),
                          static_cast<std::uint32_t>(rng.below(2))}});
    REQUIRE(w.consistent());
    REQUIRE(w.length() == static_cast<std::size_t>(k + 1));
  }
  CHECK_THROWS_AS(w.append(JointSample{{0, 5, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(w.append(JointSample{{0, 1}}), std::invalid_argument);
  w.clear();
  CHECK(w.length() == 0);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = Rng::stream(5, {1, 2, 3});
  Rng b = Rng::stream(5, {1, 2, 3});
  Rng c = Rng::stream(5, {1, 2, 4});
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}
