#include "nipt/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace nipt {

namespace {

void require_same_size(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("pmf alphabet mismatch: sizes " + std::to_string(f.size()) +
                                " and " + std::to_string(g.size()));
  }
}

}  // namespace

Alphabet::Alphabet(std::vector<double> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw std::invalid_argument("alphabet needs at least 2 symbols");
  }
  std::set<double> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) {
    throw std::invalid_argument("alphabet labels must be distinct");
  }
  for (double a : labels_) {
    if (!std::isfinite(a)) throw std::invalid_argument("alphabet labels must be finite");
  }
}

Alphabet Alphabet::integer_range(int lo, int hi) {
  std::vector<double> labels;
  for (int a = lo; a <= hi; ++a) labels.push_back(a);
  return Alphabet(std::move(labels));
}

std::optional<std::size_t> Alphabet::index_of(double label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

double Alphabet::min_label() const { return *std::min_element(labels_.begin(), labels_.end()); }
double Alphabet::max_label() const { return *std::max_element(labels_.begin(), labels_.end()); }

Pmf::Pmf(Alphabet alphabet, std::vector<double> probs)
    : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
  if (probs_.size() != alphabet_.size()) {
    throw std::invalid_argument("pmf length " + std::to_string(probs_.size()) +
                                " does not match alphabet size " +
                                std::to_string(alphabet_.size()));
  }
  double sum = 0.0;
  strictly_positive_ = true;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("pmf entries must be finite and non-negative");
    }
    if (p == 0.0) strictly_positive_ = false;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("pmf entries sum to " + std::to_string(sum) + ", not 1");
  }
}

Pmf Pmf::uniform(const Alphabet& alphabet) {
  return Pmf(alphabet, std::vector<double>(alphabet.size(), 1.0 / alphabet.size()));
}

Pmf Pmf::point_mass(const Alphabet& alphabet, std::size_t index) {
  std::vector<double> p(alphabet.size(), 0.0);
  p.at(index) = 1.0;
  return Pmf(alphabet, std::move(p));
}

Pmf Pmf::discrete_gaussian(const Alphabet& alphabet, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("discrete gaussian scale must be positive");
  std::vector<double> w;
  for (double a : alphabet.labels()) w.push_back(std::exp(-a * a / (2.0 * d * d)));
  return from_weights(alphabet, w);
}

Pmf Pmf::from_weights(const Alphabet& alphabet, std::span<const double> weights) {
  if (weights.size() != alphabet.size()) throw std::invalid_argument("weight length mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = weights[i] / total;
  return Pmf(alphabet, std::move(p));
}

double Pmf::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) m += probs_[i] * alphabet_.label(i);
  return m;
}

double Pmf::variance() const {
  const double mu = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double d = alphabet_.label(i) - mu;
    v += probs_[i] * d * d;
  }
  return v;
}

JointPmf::JointPmf(std::vector<Alphabet> factors, std::vector<double> probs)
    : factors_(std::move(factors)), probs_(std::move(probs)) {
  if (factors_.empty()) throw std::invalid_argument("joint pmf needs at least one factor");
  std::size_t m = 1;
  for (const auto& a : factors_) m *= a.size();
  if (probs_.size() != m) throw std::invalid_argument("joint pmf length mismatch");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("joint pmf entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("joint pmf entries do not sum to 1");
  }
}

JointPmf JointPmf::product(std::span<const Pmf> factors) {
  std::vector<Alphabet> alphabets;
  std::vector<double> probs{1.0};
  for (const auto& f : factors) {
    alphabets.push_back(f.alphabet());
    std::vector<double> next;
    next.reserve(probs.size() * f.size());
    for (double p : probs) {
      for (double q : f.probs()) next.push_back(p * q);
    }
    probs = std::move(next);
  }
  // Products of normalized factors can drift by a few ulps.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return JointPmf(std::move(alphabets), std::move(probs));
}

std::vector<std::uint32_t> JointPmf::unravel(std::size_t flat) const {
  std::vector<std::uint32_t> idx(factors_.size());
  for (std::size_t j = factors_.size(); j-- > 0;) {
    idx[j] = static_cast<std::uint32_t>(flat % factors_[j].size());
    flat /= factors_[j].size();
  }
  return idx;
}

WindowCounts::WindowCounts(std::vector<Alphabet> alphabets) : alphabets_(std::move(alphabets)) {
  if (alphabets_.empty()) throw std::invalid_argument("window needs at least one sensor");
  for (const auto& a : alphabets_) counts_.emplace_back(a.size(), 0);
}

void WindowCounts::append(const JointSample& sample) {
  if (sample.symbols.size() != alphabets_.size()) {
    throw std::invalid_argument("sample arity does not match sensor count");
  }
  for (std::size_t j = 0; j < alphabets_.size(); ++j) {
    if (sample.symbols[j] >= alphabets_[j].size()) {
      throw std::invalid_argument("symbol index out of range for sensor " + std::to_string(j));
    }
  }
  for (std::size_t j = 0; j < alphabets_.size(); ++j) ++counts_[j][sample.symbols[j]];
  ++joint_[sample.symbols];
  ++n_;
}

void WindowCounts::clear() {
  for (auto& c : counts_) std::fill(c.begin(), c.end(), 0);
  joint_.clear();
  n_ = 0;
}

bool WindowCounts::consistent() const {
  std::uint64_t joint_total = 0;
  std::vector<std::vector<std::uint64_t>> tally;
  for (const auto& a : alphabets_) tally.emplace_back(a.size(), 0);
  for (const auto& [tuple, count] : joint_) {
    joint_total += count;
    for (std::size_t j = 0; j < tuple.size(); ++j) tally[j][tuple[j]] += count;
  }
  if (joint_total != n_) return false;
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    if (tally[j] != counts_[j]) return false;
    if (std::accumulate(counts_[j].begin(), counts_[j].end(), std::uint64_t{0}) != n_) return false;
  }
  return true;
}

Pmf marginal(const JointPmf& joint, std::size_t sensor) {
  if (sensor >= joint.sensors()) {
    throw std::out_of_range("sensor index " + std::to_string(sensor) + " out of range");
  }
  const auto& factors = joint.factors();
  std::size_t stride = 1;
  for (std::size_t j = sensor + 1; j < factors.size(); ++j) stride *= factors[j].size();
  const std::size_t m_j = factors[sensor].size();
  std::vector<double> out(m_j, 0.0);
  const auto probs = joint.probs();
  for (std::size_t flat = 0; flat < probs.size(); ++flat) out[(flat / stride) % m_j] += probs[flat];
  return Pmf(factors[sensor], std::move(out));
}

double kl_divergence(std::span<const double> f, std::span<const double> g) {
  require_same_size(f, g);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    if (g[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += f[i] * std::log(f[i] / g[i]);
  }
  // Rounding can push the sum of a near-zero divergence slightly negative.
  return std::max(d, 0.0);
}

double kl_divergence(const Pmf& f, const Pmf& g) {
  if (!(f.alphabet() == g.alphabet())) throw std::invalid_argument("pmf alphabet mismatch");
  return kl_divergence(f.probs(), g.probs());
}

double kl_divergence(const SparseJointPmf& f, std::span<const Pmf> factors) {
  double d = 0.0;
  for (const auto& [tuple, p] : f) {
    if (tuple.size() != factors.size()) throw std::invalid_argument("tuple arity mismatch");
    if (p == 0.0) continue;
    double g = 1.0;
    for (std::size_t j = 0; j < tuple.size(); ++j) g *= factors[j][tuple[j]];
    if (g == 0.0) return std::numeric_limits<double>::infinity();
    d += p * std::log(p / g);
  }
  return std::max(d, 0.0);
}

double l1_distance(std::span<const double> f, std::span<const double> g) {
  require_same_size(f, g);
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) d += std::abs(f[i] - g[i]);
  return d;
}

double l1_distance(const Pmf& f, const Pmf& g) {
  if (!(f.alphabet() == g.alphabet())) throw std::invalid_argument("pmf alphabet mismatch");
  return l1_distance(f.probs(), g.probs());
}

EmpiricalDistributions empirical_pmfs(const WindowCounts& window) {
  const std::size_t n = window.length();
  if (n == 0) throw std::invalid_argument("empirical pmf of an empty window");
  EmpiricalDistributions out;
  for (std::size_t j = 0; j < window.sensors(); ++j) {
    const auto c = window.counts(j);
    std::vector<double> p(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) p[i] = static_cast<double>(c[i]) / n;
    out.marginals.emplace_back(window.alphabets()[j], std::move(p));
  }
  for (const auto& [tuple, count] : window.joint()) {
    out.joint.emplace(tuple, static_cast<double>(count) / n);
  }
  return out;
}

}  // namespace nipt
