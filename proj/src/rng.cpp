#include "nipt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nipt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open_zero() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

double Rng::exponential() { return -std::log(uniform_open_zero()); }

std::size_t Rng::categorical(std::span<const double> cdf) {
  const double u = uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::vector<double> cumulative(std::span<const double> probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

std::vector<double> dirichlet_point(std::size_t m, Rng& rng) {
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& x : w) {
    x = rng.exponential();
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

Pmf dirichlet_pmf(const Alphabet& alphabet, Rng& rng) {
  return Pmf::from_weights(alphabet, dirichlet_point(alphabet.size(), rng));
}

}  // namespace nipt
