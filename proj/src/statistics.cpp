#include "nipt/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nipt/rng.hpp"

namespace nipt {

LocalStatistic::LocalStatistic(Definition def) : def_(std::move(def)) {
  if (!def_.eval || !def_.gradient) throw std::invalid_argument("statistic needs eval and gradient");
  if (!(def_.lipschitz > 0.0) || !std::isfinite(def_.lipschitz)) {
    throw std::invalid_argument("statistic Lipschitz constant must be positive and finite");
  }
  if (def_.floor && !(*def_.floor > 0.0)) {
    throw std::invalid_argument("statistic floor must be positive");
  }
  if (def_.maximizer && def_.maximizer->size() != def_.alphabet.size()) {
    throw std::invalid_argument("statistic maximizer length mismatch");
  }
}

double LocalStatistic::eval(const Pmf& f) const {
  if (!(f.alphabet() == def_.alphabet)) throw std::invalid_argument("statistic alphabet mismatch");
  return def_.eval(f.probs());
}

std::vector<double> LocalStatistic::gradient(const Pmf& f) const {
  if (!(f.alphabet() == def_.alphabet)) throw std::invalid_argument("statistic alphabet mismatch");
  std::vector<double> g(f.size());
  def_.gradient(f.probs(), g);
  return g;
}

LocalStatistic LocalStatistic::with_floor(double floor) const {
  Definition def = def_;
  def.floor = floor;
  return LocalStatistic(std::move(def));
}

LocalStatistic make_mean_statistic(std::span<const double> h, const Pmf& f0,
                                   std::optional<double> floor) {
  if (h.size() != f0.size()) throw std::invalid_argument("h length does not match alphabet");
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  if (*hi - *lo <= 0.0) throw std::invalid_argument("mean statistic with constant h is degenerate");

  double base = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) base += h[i] * f0[i];
  std::vector<double> centered(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) centered[i] = h[i] - base;

  // KL-closest maximizer: f0 conditioned on argmax h.
  std::vector<double> maximizer(h.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] == *hi) {
      maximizer[i] = f0[i];
      mass += f0[i];
    }
  }
  if (mass > 0.0) {
    for (double& p : maximizer) p /= mass;
  } else {
    for (std::size_t i = 0; i < h.size(); ++i) maximizer[i] = h[i] == *hi ? 1.0 : 0.0;
    const double cnt = std::accumulate(maximizer.begin(), maximizer.end(), 0.0);
    for (double& p : maximizer) p /= cnt;
  }

  LocalStatistic::Definition def{
      .name = "mean",
      .kind = StatisticKind::mean,
      .alphabet = f0.alphabet(),
      .eval =
          [centered](std::span<const double> f) {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s += centered[i] * f[i];
            return s;
          },
      .gradient =
          [centered](std::span<const double>, std::span<double> out) {
            std::copy(centered.begin(), centered.end(), out.begin());
          },
      .lipschitz = (*hi - *lo) / 2.0,
      .floor = floor,
      .max_value = *hi - base,
      .maximizer = std::move(maximizer),
  };
  return LocalStatistic(std::move(def));
}

LocalStatistic make_variance_statistic(const Pmf& f0, double offset, std::optional<double> floor) {
  const Alphabet& alphabet = f0.alphabet();
  const std::vector<double> a = alphabet.labels();
  const std::vector<double> ref(f0.probs().begin(), f0.probs().end());
  const double a_abs = std::max(std::abs(alphabet.min_label()), std::abs(alphabet.max_label()));
  const double lo = alphabet.min_label();
  const double hi = alphabet.max_label();

  std::vector<double> maximizer(a.size(), 0.0);
  maximizer[*alphabet.index_of(lo)] = 0.5;
  maximizer[*alphabet.index_of(hi)] = 0.5;

  LocalStatistic::Definition def{
      .name = "variance",
      .kind = StatisticKind::variance,
      .alphabet = alphabet,
      .eval =
          [a, offset](std::span<const double> f) {
            double m1 = 0.0;
            double m2 = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
              m1 += f[i] * a[i];
              m2 += f[i] * a[i] * a[i];
            }
            return m2 - m1 * m1 - offset;
          },
      .gradient =
          [a, ref](std::span<const double> f, std::span<double> out) {
            double mu = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) mu += f[i] * a[i];
            double shift = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
              out[i] = a[i] * a[i] - 2.0 * mu * a[i];
              shift += ref[i] * out[i];
            }
            for (std::size_t i = 0; i < f.size(); ++i) out[i] -= shift;
          },
      // Conservative: max|a^2| + 2 max|mu| max|a| <= 3 max|a|^2.
      .lipschitz = 3.0 * a_abs * a_abs,
      .floor = floor,
      .max_value = (hi - lo) * (hi - lo) / 4.0 - offset,
      .maximizer = std::move(maximizer),
  };
  return LocalStatistic(std::move(def));
}

LocalStatistic make_centred_variance_statistic(const Pmf& f0, std::optional<double> floor) {
  return make_variance_statistic(f0, f0.variance(), floor);
}

NetworkModel::NetworkModel(std::vector<Sensor> sensors) : sensors_(std::move(sensors)) {
  if (sensors_.empty()) throw std::invalid_argument("network needs at least one sensor");
  for (std::size_t j = 0; j < sensors_.size(); ++j) {
    const auto& s = sensors_[j];
    const std::string where = "sensor " + std::to_string(j) + ": ";
    if (!s.reference.strictly_positive()) {
      throw std::invalid_argument(where + "reference pmf must be strictly positive");
    }
    if (!(s.reference.alphabet() == s.statistic.alphabet())) {
      throw std::invalid_argument(where + "statistic alphabet differs from reference alphabet");
    }
    const double q0 = s.statistic.eval(s.reference);
    if (std::abs(q0) > 1e-9) {
      throw std::invalid_argument(where + "statistic is not normalized, q(f0) = " + std::to_string(q0));
    }
#ifndef NDEBUG
    if (s.statistic.kind() == StatisticKind::custom) {
      const auto check = check_statistic(s.statistic, 200, 0x5eed + j, 1e-9);
      if (!check.passed) throw std::invalid_argument(where + "custom statistic failed property check");
    }
#endif
  }
}

std::vector<Pmf> NetworkModel::references() const {
  std::vector<Pmf> out;
  for (const auto& s : sensors_) out.push_back(s.reference);
  return out;
}

std::vector<Alphabet> NetworkModel::alphabets() const {
  std::vector<Alphabet> out;
  for (const auto& s : sensors_) out.push_back(s.reference.alphabet());
  return out;
}

double NetworkModel::lipschitz_sum() const {
  double l = 0.0;
  for (const auto& s : sensors_) l += s.statistic.lipschitz();
  return l;
}

double NetworkModel::min_floor() const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sensors_.size(); ++j) {
    const auto f = sensors_[j].statistic.floor();
    if (!f) throw std::logic_error("sensor " + std::to_string(j) + " has no statistic floor");
    lo = std::min(lo, *f);
  }
  return lo;
}

std::size_t NetworkModel::total_symbols() const {
  std::size_t m = 0;
  for (const auto& s : sensors_) m += s.reference.size();
  return m;
}

double NetworkModel::joint_size() const {
  double m = 1.0;
  for (const auto& s : sensors_) m *= static_cast<double>(s.reference.size());
  return m;
}

double global_eval(const NetworkModel& model, std::span<const Pmf> marginals) {
  if (marginals.size() != model.size()) {
    throw std::invalid_argument("expected " + std::to_string(model.size()) + " marginals, got " +
                                std::to_string(marginals.size()));
  }
  double q = 0.0;
  for (std::size_t j = 0; j < marginals.size(); ++j) q += model.statistic(j).eval(marginals[j]);
  return q;
}

StatisticCheck check_statistic(const LocalStatistic& statistic, std::size_t trials,
                               std::uint64_t seed, double slack) {
  StatisticCheck out;
  Rng rng(seed);
  const std::size_t m = statistic.alphabet().size();
  std::vector<double> mix(m), grad(m), dir(m), plus(m), minus(m);
  auto draw = [&](std::size_t t) {
    // Every 8th draw is a vertex so boundary behaviour is exercised too.
    if (t % 8 == 7) {
      std::vector<double> v(m, 0.0);
      v[rng.below(m)] = 1.0;
      return v;
    }
    return dirichlet_point(m, rng);
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = draw(t);
    const auto g = draw(t + 1);
    const double alpha = rng.uniform();
    for (std::size_t i = 0; i < m; ++i) mix[i] = alpha * f[i] + (1.0 - alpha) * g[i];
    const double qf = statistic.eval(f);
    const double qg = statistic.eval(g);
    out.worst_concavity_gap =
        std::max(out.worst_concavity_gap, alpha * qf + (1.0 - alpha) * qg - statistic.eval(mix));
    out.worst_lipschitz_excess = std::max(
        out.worst_lipschitz_excess, std::abs(qf - qg) - statistic.lipschitz() * l1_distance(f, g));

    // Directional derivative along a tangent direction, away from the boundary.
    auto x = dirichlet_point(m, rng);
    for (auto& xi : x) xi = 0.5 * xi + 0.5 / m;
    double dsum = 0.0;
    for (auto& d : dir) {
      d = rng.uniform() - 0.5;
      dsum += d;
    }
    double dnorm = 0.0;
    for (auto& d : dir) {
      d -= dsum / m;
      dnorm += std::abs(d);
    }
    for (auto& d : dir) d /= dnorm;
    const double h = 1e-6;
    for (std::size_t i = 0; i < m; ++i) {
      plus[i] = x[i] + h * dir[i];
      minus[i] = x[i] - h * dir[i];
    }
    const double fd = (statistic.eval(plus) - statistic.eval(minus)) / (2.0 * h);
    statistic.gradient(x, grad);
    double analytic = 0.0;
    for (std::size_t i = 0; i < m; ++i) analytic += grad[i] * dir[i];
    out.worst_gradient_error =
        std::max(out.worst_gradient_error, std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
  }
  out.passed = out.worst_concavity_gap <= slack && out.worst_lipschitz_excess <= slack &&
               out.worst_gradient_error <= 1e-4;
  return out;
}

}  // namespace nipt
