#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <doctest.h>

#include "fixtures.hpp"
#include "nipt/detector.hpp"
#include "nipt/rng.hpp"

using namespace nipt;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

SampleSource constant_source(std::uint32_t symbol) {
  return [symbol] { return JointSample{{symbol}}; };
}

SampleSource bernoulli_source(double p, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng, p] { return JointSample{{rng->uniform() < p ? 1u : 0u}}; };
}

}  // namespace

TEST_CASE("optimal schedule example") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto s = make_schedule(model, 10.0, 0.25, 0.2);
  CHECK(s.c_d() == doctest::Approx(0.158203125).epsilon(1e-14));
  REQUIRE(s.n_low());
  CHECK(*s.n_low() == 16);
  CHECK(s.threshold(16) == 0.0);
  CHECK(s.threshold(17) == s.c_d());
  REQUIRE(s.derived());
  CHECK(s.derived()->q_floor == 0.75);
  CHECK(s.derived()->lipschitz == 1.0);
  CHECK(s.derived()->n_upper == doctest::Approx(32.0));

  // Exact ratio 1.2 * 12.5 / 0.75 = 20 must not round up to 21.
  CHECK(*make_schedule(model, 12.5, 0.25, 0.2).n_low() == 20);
}

TEST_CASE("schedule preconditions") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  CHECK_THROWS_AS(make_schedule(model, 10.0, 0.6, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(model, 10.0, 0.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(model, 10.0, 0.25, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(model, 10.0, 0.25, 1.0), std::invalid_argument);
  // (1 + rho) / (1 - rho) = 4 > q_floor / kappa = 3.
  CHECK_THROWS_AS(make_schedule(model, 10.0, 0.25, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(model, -1.0, 0.25, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(ThresholdSchedule::two_level(1.0, 0.1, 3, -0.5), std::invalid_argument);
}

TEST_CASE("schedule in the small rho limit") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto s = make_schedule(model, 9.3, 0.25, 1e-9);
  CHECK(s.c_d() == doctest::Approx(2.0 * 0.25 * 0.25).epsilon(1e-8));
  CHECK(*s.n_low() == 13);  // ceil(9.3 / 0.75)
}

TEST_CASE("tail-assumption warning") {
  const auto model = fixture::copies(fixture::variance_sensor(-4, 4), 3);
  CHECK(!make_schedule(model, 30.0, 0.25, 0.2).warnings().empty());
  const NetworkModel bin({fixture::binary_mean_sensor()});
  CHECK(make_schedule(bin, 2000.0, 0.25, 0.2).warnings().empty());
}

TEST_CASE("special schedules") {
  const auto a = ThresholdSchedule::always_confirm(3.0, 0.1);
  CHECK(a.threshold(1) == 0.0);
  CHECK(a.threshold(1000000) == 0.0);
  const auto n = ThresholdSchedule::never_confirm(3.0, 0.1);
  CHECK(n.threshold(1) == kInf);
  CHECK(!n.n_low());
}

TEST_CASE("golden trace on a constant stream") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto schedule = make_schedule(model, 2.0, 0.25, 0.2);
  const auto table = ProjectionTable::build(model, 2.0, 0.25, 10);
  NiptDetector det(model, schedule, table);
  const double expected_s[3] = {0.75, 1.5, 2.25};
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto ev = det.step({{1}});
    CHECK(ev.k == k);
    CHECK(ev.statistic == doctest::Approx(expected_s[k - 1]).epsilon(1e-15));
    CHECK(ev.window == k);
    if (k < 3) {
      CHECK(ev.kind == EventKind::quiet);
      CHECK(std::isnan(ev.divergence));
      CHECK(std::isnan(ev.threshold));
    } else {
      CHECK(ev.kind == EventKind::alarm_confirmed);
      // D = -log f3*(+1) with f3*(+1) = (1 + 2/3 + 1/4) / 2.
      CHECK(ev.divergence == doctest::Approx(-std::log((1.0 + 2.0 / 3.0 + 0.25) / 2.0)).epsilon(1e-6));
      CHECK(ev.threshold == 0.0);
    }
  }
  const auto run = run_until_alarm(constant_source(1), model, schedule, table, 100);
  CHECK(run.first_crossing == std::size_t{3});
  CHECK(run.stop == std::size_t{3});
  CHECK(run.first_crossing_confirmed);
  CHECK(run.suppressions == 0);
  CHECK(run.steps == 3);
}

TEST_CASE("zero threshold alarms at the first step") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto table = ProjectionTable::build(model, 0.0, 0.25, 4);
  const auto schedule = ThresholdSchedule::always_confirm(0.0, 0.25);
  for (std::uint32_t sym : {0u, 1u}) {
    const auto run = run_until_alarm(constant_source(sym), model, schedule, table, 10);
    CHECK(run.stop == std::size_t{1});
  }
  NiptDetector det(model, schedule, table);
  const auto ev = det.step({{0}});
  // Only the empty window attains S_1 = 0.
  CHECK(ev.window == 0);
  CHECK(ev.divergence == kInf);
  CHECK(ev.kind == EventKind::alarm_confirmed);
}

TEST_CASE("never confirming yields a censored run with restarts") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto table = ProjectionTable::build(model, 2.0, 0.25, 10);
  const auto schedule = ThresholdSchedule::never_confirm(2.0, 0.25);
  const auto run = run_until_alarm(constant_source(1), model, schedule, table, 30);
  CHECK(run.censored());
  CHECK(run.steps == 30);
  CHECK(run.first_crossing == std::size_t{3});
  CHECK(!run.first_crossing_confirmed);
  CHECK(run.suppressions == 10);
  CHECK_THROWS_AS(run_until_alarm(constant_source(1), model, schedule, table, 0), std::invalid_argument);
}

TEST_CASE("suppression restarts the window") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto table = ProjectionTable::build(model, 2.0, 0.25, 10);
  const auto schedule = ThresholdSchedule::never_confirm(2.0, 0.25);
  NiptDetector det(model, schedule, table);
  for (int i = 0; i < 3; ++i) det.step({{1}});
  CHECK(det.origin() == 4);
  CHECK(det.buffered() == 0);
  CHECK(det.time() == 3);
  const auto ev = det.step({{1}});
  CHECK(ev.statistic == 0.75);
  CHECK(ev.window == 1);
  det.reset();
  CHECK(det.time() == 0);
  CHECK(det.origin() == 1);
  CHECK(det.step({{1}}).k == 1);
}

TEST_CASE("after a suppression the detector behaves like a fresh one") {
  const auto model = fixture::copies(fixture::variance_sensor(-2, 2), 2);
  const double c_s = 3.0;
  const double kappa = 0.25;
  const auto table = ProjectionTable::build(model, c_s, kappa, 500);
  const auto schedule = ThresholdSchedule::never_confirm(c_s, kappa);
  Rng rng(21);
  const auto cdf = cumulative(model.reference(0).probs());
  std::vector<JointSample> xs(400, JointSample{{0, 0}});
  for (auto& x : xs) x.symbols = {std::uint32_t(rng.categorical(cdf)), std::uint32_t(rng.categorical(cdf))};
  NiptDetector det(model, schedule, table);
  std::size_t checked = 0;
  for (std::size_t k = 1; k <= xs.size(); ++k) {
    if (det.step(xs[k - 1]).kind != EventKind::alarm_suppressed) continue;
    CHECK(det.origin() == k + 1);
    CHECK(det.buffered() == 0);
    NiptDetector fresh(model, schedule, table);
    NiptDetector copy = det;
    for (std::size_t t = k + 1; t <= std::min(xs.size(), k + 30); ++t) {
      const auto a = copy.step(xs[t - 1]);
      const auto b = fresh.step(xs[t - 1]);
      CHECK(a.statistic == b.statistic);
      CHECK(a.window == b.window);
      CHECK(a.kind == b.kind);
    }
    ++checked;
  }
  CHECK(checked > 3);
}

TEST_CASE("first crossing never follows the confirmed alarm") {
  const NetworkModel model({fixture::bernoulli_sensor(0.3, 0.4)});
  const double c_s = 3.0;
  const double kappa = 0.1;
  const auto schedule = make_schedule(model, c_s, kappa, 0.2);
  const auto table = ProjectionTable::build(model, c_s, kappa, 400);
  std::size_t suppressed_runs = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto run = run_until_alarm(bernoulli_source(0.3 + 0.3 * (t % 2), 1000 + t), model, schedule, table, 300);
    if (run.censored()) continue;
    REQUIRE(run.first_crossing);
    CHECK(*run.first_crossing <= *run.stop);
    CHECK(run.first_crossing_confirmed == (*run.first_crossing == *run.stop));
    if (run.suppressions > 0) ++suppressed_runs;
  }
  CHECK(suppressed_runs > 0);
}

TEST_CASE("window divergence against a direct computation") {
  const auto model = fixture::copies(fixture::variance_sensor(-1, 1, 1.0, 0.1), 2);
  const auto table = ProjectionTable::build(model, 50.0, 0.05, 2);
  const auto schedule = ThresholdSchedule::never_confirm(50.0, 0.05);
  NiptDetector det(model, schedule, table);
  const std::vector<JointSample> xs{{{0, 2}}, {{2, 2}}, {{0, 2}}, {{1, 0}}, {{0, 2}}};
  for (const auto& x : xs) det.step(x);
  const std::vector<Pmf> g = model.references();
  // Window [2, 5]: (2,2), (0,2) twice, (1,0).
  const double direct = 0.25 * std::log(0.25 / (g[0][2] * g[1][2])) + 0.5 * std::log(0.5 / (g[0][0] * g[1][2])) +
                        0.25 * std::log(0.25 / (g[0][1] * g[1][0]));
  CHECK(det.window_divergence(2, g) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(det.window_divergence(6, g) == kInf);
  std::vector<Pmf> holed = g;
  holed[1] = Pmf(model.alphabet(1), {0.0, 0.5, 0.5});
  CHECK(det.window_divergence(2, holed) == kInf);
  CHECK(det.window_divergence(5, holed) < kInf);
}

TEST_CASE("boundary entries confirm only windows the boundary pmf supports") {
  // Bernoulli(0.5): n = 8 needs f(1) = 1, so a window containing a 0 has D = inf.
  const NetworkModel model({fixture::bernoulli_sensor(0.5)});
  const auto table = ProjectionTable::build(model, 2.0, 0.25, 20);
  REQUIRE(table.at(8).status == ProjectionStatus::boundary);
  const auto schedule = ThresholdSchedule::two_level(2.0, 0.25, std::nullopt, 1e6);
  const auto& edge = table.at(8).factors;
  NiptDetector det(model, schedule, table);
  CHECK(det.step({{0}}).kind == EventKind::quiet);
  for (int i = 0; i < 7; ++i) CHECK(det.step({{1}}).kind == EventKind::quiet);
  CHECK(det.window_divergence(1, edge) == kInf);
  CHECK(det.window_divergence(2, edge) == 0.0);
  // The first all-ones window of length 8 crosses with D = 0 < c_d.
  const auto ev = det.step({{1}});
  CHECK(ev.kind == EventKind::alarm_suppressed);
  CHECK(ev.window == 8);
  CHECK(ev.divergence == 0.0);
  CHECK_THROWS_AS(det.window_divergence(1, edge), std::out_of_range);
}

TEST_CASE("detector validates its inputs") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  const auto table = ProjectionTable::build(model, 2.0, 0.25, 2);
  CHECK_THROWS_AS(NiptDetector(model, ThresholdSchedule::always_confirm(3.0, 0.25), table), std::invalid_argument);
  CHECK_THROWS_AS(NiptDetector(model, ThresholdSchedule::always_confirm(2.0, 0.3), table), std::invalid_argument);
  // Alarm window 3 exceeds n_max = 2.
  NiptDetector det(model, ThresholdSchedule::always_confirm(2.0, 0.25), table);
  det.step({{1}});
  det.step({{1}});
  CHECK_THROWS_AS(det.step({{1}}), std::out_of_range);
}
