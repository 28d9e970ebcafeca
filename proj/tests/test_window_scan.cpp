#include <algorithm>
#include <stdexcept>

#include <doctest.h>

#include "fixtures.hpp"
#include "nipt/rng.hpp"
#include "nipt/window_scan.hpp"
#include "oracles.hpp"

using namespace nipt;

namespace {

// Pre-change samples from f0 for the first `change - 1` steps, then from a
// pmf that raises every statistic.
std::vector<JointSample> mixed_stream(const NetworkModel& model, std::size_t length, std::size_t change,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> pre, post;
  for (std::size_t j = 0; j < model.size(); ++j) {
    pre.push_back(cumulative(model.reference(j).probs()));
    const std::size_t m = model.alphabet(j).size();
    std::vector<double> tail(m, 0.5 / static_cast<double>(m));
    tail.front() += 0.25;
    tail.back() += 0.25;
    post.push_back(cumulative(tail));
  }
  std::vector<JointSample> out(length);
  for (std::size_t k = 1; k <= length; ++k) {
    out[k - 1].symbols.resize(model.size());
    for (std::size_t j = 0; j < model.size(); ++j) {
      out[k - 1].symbols[j] = static_cast<std::uint32_t>(rng.categorical(k < change ? pre[j] : post[j]));
    }
  }
  return out;
}

void check_against_oracle(const NetworkModel& model, double kappa, std::size_t length, std::size_t change,
                          double restart_rate, std::optional<std::size_t> cap, std::uint64_t seed) {
  const auto x = mixed_stream(model, length, change, seed);
  std::vector<std::size_t> all(model.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  WindowScanner scanner(model, all, kappa, cap);
  Rng coin(seed + 1);
  std::size_t tau = 1;
  std::size_t evaluated = 0;
  std::size_t mismatches = 0;
  for (std::size_t k = 1; k <= length; ++k) {
    scanner.append(x[k - 1]);
    const ScanResult got = scanner.scan();
    const std::size_t lo = cap && k >= *cap ? std::max(tau, k - *cap + 1) : tau;
    const auto want = oracle::definitional_scan(model, x, lo, k, kappa);
    if (got.value != want.value || got.start != want.start || got.length != want.length) ++mismatches;
    evaluated += scanner.last_evaluations();
    if (coin.uniform() < restart_rate) {
      scanner.restart();
      tau = k + 1;
      CHECK(scanner.origin() == tau);
      CHECK(scanner.buffered() == 0);
      CHECK(scanner.scan().value == 0.0);
      CHECK(scanner.scan().start == k + 1);
    }
  }
  CHECK(mismatches == 0);
  CHECK(scanner.time() == length);
  // Pruning should leave far fewer than the k(k+1)/2 evaluations of a full scan.
  if (!cap && restart_rate == 0.0) CHECK(evaluated < length * (length + 1) / 20);
}

}  // namespace

TEST_CASE("scan equals the definitional maximum on variance streams") {
  const auto model = fixture::copies(fixture::variance_sensor(-3, 3), 3);
  check_against_oracle(model, 0.25, 1000, 400, 0.0, std::nullopt, 11);
  check_against_oracle(model, 0.25, 1000, 1, 0.0, std::nullopt, 12);
  check_against_oracle(model, 1.5, 1000, 2000, 0.0, std::nullopt, 13);
}

TEST_CASE("scan equals the definitional maximum with restarts") {
  const auto model = fixture::copies(fixture::variance_sensor(-2, 2), 2);
  check_against_oracle(model, 0.25, 1000, 300, 0.02, std::nullopt, 21);
  check_against_oracle(model, 0.1, 1000, 1, 0.1, std::nullopt, 22);
}

TEST_CASE("scan equals the definitional maximum with mixed statistics and a cap") {
  const NetworkModel model({fixture::variance_sensor(-2, 2), fixture::bernoulli_sensor(0.3)});
  check_against_oracle(model, 0.2, 1000, 500, 0.0, std::nullopt, 31);
  check_against_oracle(model, 0.2, 1000, 200, 0.0, std::size_t{40}, 32);
  check_against_oracle(model, 0.2, 1000, 200, 0.01, std::size_t{25}, 33);
}

TEST_CASE("empty window and ties") {
  const NetworkModel model({fixture::binary_mean_sensor()});
  WindowScanner s(model, {0}, 0.0);
  CHECK(s.scan().value == 0.0);
  CHECK(s.scan().start == 1);
  CHECK(s.scan().length == 0);
  // One -1 then one +1 with kappa = 0: windows [1,2] and [3,2] both score 0,
  // [2,2] scores 1.
  s.append({{0}});
  CHECK(s.scan().value == 0.0);
  CHECK(s.scan().start == 2);
  s.append({{1}});
  CHECK(s.scan().value == 1.0);
  CHECK(s.scan().start == 2);
  CHECK(s.scan().length == 1);
  s.append({{0}});
  // [1,3] = -1, [2,3] = 0, [3,3] = -1, empty = 0: smallest l wins.
  CHECK(s.scan().value == 0.0);
  CHECK(s.scan().start == 2);
}

TEST_CASE("window counts and sensor subsets") {
  const auto model = fixture::copies(fixture::variance_sensor(-1, 1, 1.0, 0.1), 3);
  WindowScanner s(model, {2, 0}, 0.1);
  s.append({{0, 1, 2}});
  s.append({{2, 1, 2}});
  s.append({{2, 0, 0}});
  CHECK(s.window_counts(1, 0) == std::vector<std::uint32_t>{1, 0, 2});
  CHECK(s.window_counts(2, 1) == std::vector<std::uint32_t>{0, 0, 2});
  CHECK(s.window_counts(4, 0) == std::vector<std::uint32_t>{0, 0, 0});
  CHECK_THROWS(s.window_counts(5, 0));
  CHECK_THROWS(WindowScanner(model, {3}, 0.1));
}
