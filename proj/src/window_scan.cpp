#include "nipt/window_scan.hpp"

#include <cmath>
#include <stdexcept>

namespace nipt {

WindowScanner::WindowScanner(const NetworkModel& model, std::vector<std::size_t> sensors, double kappa,
                             std::optional<std::size_t> window_cap)
    : model_(&model), sensors_(std::move(sensors)), kappa_(kappa), cap_(window_cap) {
  if (sensors_.empty()) throw std::invalid_argument("scanner needs at least one sensor");
  if (cap_ && *cap_ == 0) throw std::invalid_argument("window cap must be positive");
  for (std::size_t j : sensors_) {
    if (j >= model.size()) throw std::out_of_range("scanner sensor index out of range");
    const auto& ref = model.reference(j);
    std::vector<double> g = model.statistic(j).gradient(ref);
    double centre = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) centre += ref[i] * g[i];
    for (double& x : g) x -= centre;
    majorant_.push_back(std::move(g));
    offsets_.push_back(width_);
    width_ += ref.size();
    scratch_.emplace_back(ref.size());
  }
  restart();
}

void WindowScanner::restart() {
  tau_ = k_ + 1;
  prefix_counts_.assign(width_, 0);
  prefix_majorant_.assign(1, 0.0);
  abs_total_ = 0.0;
  candidates_.clear();
  handles_.clear();
  evicted_ = 0;
}

void WindowScanner::append(const JointSample& sample) {
  if (sample.symbols.size() != model_->size()) throw std::invalid_argument("sample arity mismatch");
  const std::size_t rows = prefix_majorant_.size();
  prefix_counts_.resize((rows + 1) * width_);
  const std::uint32_t* prev = prefix_counts_.data() + (rows - 1) * width_;
  std::uint32_t* row = prefix_counts_.data() + rows * width_;
  std::copy(prev, prev + width_, row);
  double step = -kappa_;
  for (std::size_t s = 0; s < sensors_.size(); ++s) {
    const std::uint32_t a = sample.symbols[sensors_[s]];
    if (a >= majorant_[s].size()) throw std::invalid_argument("symbol index out of range");
    ++row[offsets_[s] + a];
    step += majorant_[s][a];
  }
  const std::size_t p = rows;  // new candidate start position (1-based within buffer)
  handles_.push_back(candidates_.emplace(prefix_majorant_.back(), p));
  prefix_majorant_.push_back(prefix_majorant_.back() + step);
  abs_total_ += std::abs(step);
  ++k_;
  if (cap_) {
    while (p - evicted_ > *cap_) {
      candidates_.erase(handles_[evicted_]);
      ++evicted_;
    }
  }
}

double WindowScanner::window_value(std::size_t p) const {
  const std::size_t len = buffered();
  const std::size_t n = len - p + 1;
  const std::uint32_t* hi = prefix_counts_.data() + len * width_;
  const std::uint32_t* lo = prefix_counts_.data() + (p - 1) * width_;
  const double dn = static_cast<double>(n);
  double q = 0.0;
  for (std::size_t s = 0; s < sensors_.size(); ++s) {
    auto& f = scratch_[s];
    const std::size_t off = offsets_[s];
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(hi[off + i] - lo[off + i]) / dn;
    q += model_->statistic(sensors_[s]).eval(f);
  }
  return dn * (q - kappa_);
}

ScanResult WindowScanner::scan() const {
  const std::size_t len = buffered();
  ScanResult best{0.0, k_ + 1, 0};
  std::size_t best_p = len + 1;
  evaluations_ = 0;
  const double top = prefix_majorant_.back();
  const double margin = 1e-9 * (1.0 + abs_total_);
  for (auto it = candidates_.begin(); it != candidates_.end(); ++it) {
    // Upper bound of candidate p is top - key.
    if (it->first > top - best.value + margin) break;
    const std::size_t p = it->second;
    const double v = window_value(p);
    ++evaluations_;
    if (v > best.value || (v == best.value && p < best_p)) {
      best.value = v;
      best_p = p;
    }
  }
  best.start = tau_ + best_p - 1;
  best.length = len - best_p + 1;
  return best;
}

std::vector<std::uint32_t> WindowScanner::window_counts(std::size_t l, std::size_t s) const {
  const std::size_t len = buffered();
  if (l < tau_ || l > k_ + 1) throw std::out_of_range("window start outside buffer");
  const std::size_t p = l - tau_ + 1;
  const std::uint32_t* hi = prefix_counts_.data() + len * width_ + offsets_.at(s);
  const std::uint32_t* lo = prefix_counts_.data() + (p - 1) * width_ + offsets_.at(s);
  std::vector<std::uint32_t> out(scratch_.at(s).size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = hi[i] - lo[i];
  return out;
}

}  // namespace nipt
