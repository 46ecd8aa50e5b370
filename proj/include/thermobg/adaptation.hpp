#pragma once

// Threshold-free online update of a pixel's mixture from one new sample:
// match the closest component, find the neighborhood half-width eps* that
// maximizes the probability of observing the sample, then either update the
// matched component or spawn a new one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "thermobg/mixture.hpp"

namespace thermobg {

enum class AdaptMode { exact_history, memory_efficient };

struct AdaptationConfig {
  AdaptMode mode = AdaptMode::memory_efficient;
  int epsilon_min = 1;
  double epsilon_max_sigmas = 6.0;
  int epsilon_step = 1;
  /// Exact mode only: upper bound on eps. 0 means "reach the farthest pool sample".
  int epsilon_max_exact = 0;

  void validate() const {
    if (epsilon_min < 1) throw std::invalid_argument("AdaptationConfig: epsilon_min must be >= 1");
    if (epsilon_step < 1) throw std::invalid_argument("AdaptationConfig: epsilon_step must be >= 1");
    if (!(epsilon_max_sigmas > 0.0)) throw std::invalid_argument("AdaptationConfig: epsilon_max_sigmas must be positive");
    if (epsilon_max_exact < 0) throw std::invalid_argument("AdaptationConfig: epsilon_max_exact must be >= 0");
  }
};

/// Sliding window over the last `capacity` samples of one pixel.
class HistoryPool {
 public:
  HistoryPool() = default;
  explicit HistoryPool(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("HistoryPool: capacity must be positive");
    samples_.reserve(capacity);
  }

  void push(double x) {
    if (samples_.size() < capacity_) {
      samples_.push_back(x);
    } else {
      samples_[head_] = x;
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return samples_.empty(); }
  /// Storage order, not arrival order.
  std::span<const double> samples() const { return samples_; }

  /// Samples oldest first.
  std::vector<double> chronological() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) out.push_back(samples_[(head_ + i) % samples_.size()]);
    return out;
  }

 private:
  std::size_t capacity_ = 0;
  std::size_t head_ = 0;
  std::vector<double> samples_;
};

struct Match {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Closest component by Mahalanobis distance |x - mu_k| sqrt(tau_k); ties go to the lowest index.
inline Match match_component(const MixtureModel& m, double x) {
  if (m.empty()) throw std::invalid_argument("match_component: empty model");
  Match best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto& c = m.components[k];
    const double d = std::abs(x - c.mean) / std::sqrt(c.variance);
    if (d < best.distance) best = {k, d};
  }
  return best;
}

struct EpsilonSearch {
  int epsilon = 1;
  double probability = 0.0;
};

/// p(x; eps) = (N_eps / N) / (2 eps) over eps = eps_min, eps_min + step, ...
/// where N_eps counts pool samples with |x_i - x| <= eps. Smallest eps wins ties.
inline EpsilonSearch epsilon_star_exact(const HistoryPool& pool, double x, const AdaptationConfig& cfg) {
  if (pool.empty()) throw std::invalid_argument("epsilon_star_exact: empty pool");
  std::vector<double> dist;
  dist.reserve(pool.size());
  for (double s : pool.samples()) dist.push_back(std::abs(s - x));
  std::sort(dist.begin(), dist.end());

  const int reach = static_cast<int>(std::ceil(dist.back()));
  const int eps_max = std::max(cfg.epsilon_min, cfg.epsilon_max_exact > 0 ? cfg.epsilon_max_exact : reach);
  const double n = static_cast<double>(pool.size());

  EpsilonSearch best{cfg.epsilon_min, 0.0};
  std::size_t count = 0;
  for (int eps = cfg.epsilon_min; eps <= eps_max; eps += cfg.epsilon_step) {
    while (count < dist.size() && dist[count] <= static_cast<double>(eps)) ++count;
    const double p = static_cast<double>(count) / n / (2.0 * eps);
    if (p > best.probability) best = {eps, p};
  }
  return best;
}

/// p~(x; eps) = w_c (G_c(x + eps) - G_c(x - eps)) / (2 eps), the pool count
/// replaced by the matched component's Gaussian mass. Searched on the integer
/// grid from eps_min up to ceil(|x - mu_c| + epsilon_max_sigmas sigma_c).
///
/// p~ is unimodal in eps, so the scan stops once it falls below the running
/// maximum, and starts no lower than |x - mu_c| - 10 sigma_c where the mass
/// is below 1e-23 and cannot hold the maximum.
inline EpsilonSearch epsilon_star_approx(const MixtureModel& m, std::size_t c, double x,
                                         const AdaptationConfig& cfg) {
  if (c >= m.size()) throw std::out_of_range("epsilon_star_approx: component index");
  const auto& comp = m.components[c];
  const double sd = std::sqrt(comp.variance);
  const double offset = std::abs(x - comp.mean);
  const int eps_max = std::max(cfg.epsilon_min, static_cast<int>(std::ceil(offset + cfg.epsilon_max_sigmas * sd)));

  int eps = cfg.epsilon_min;
  const double skip_to = offset - 10.0 * sd;
  if (skip_to > eps) {
    const int steps = static_cast<int>(std::floor((skip_to - eps) / cfg.epsilon_step));
    eps += std::max(steps, 0) * cfg.epsilon_step;
  }

  EpsilonSearch best{cfg.epsilon_min, 0.0};
  for (; eps <= eps_max; eps += cfg.epsilon_step) {
    const double p = comp.weight * gaussian_interval_mass(x - eps, x + eps, comp.mean, comp.variance) / (2.0 * eps);
    if (p > best.probability) {
      best = {eps, p};
    } else if (best.probability > 0.0 && p < best.probability) {
      break;
    }
  }
  return best;
}

enum class Decision { matched, new_component };

/// Matched iff N(x | mu_c, sigma_c^2) >= p(x; eps*).
inline Decision decide(const MixtureModel& m, std::size_t c, double x, double p_eps_star) {
  const auto& comp = m.components.at(c);
  return gaussian_pdf(x, comp.mean, comp.variance) >= p_eps_star ? Decision::matched : Decision::new_component;
}

/// Following-the-leader update of the matched component c. All right-hand
/// sides use pre-update values. Prunes below 1/N and renormalizes afterwards.
inline void update_matched(MixtureModel& m, std::size_t c, double x) {
  if (c >= m.size()) throw std::out_of_range("update_matched: component index");
  const double n = static_cast<double>(m.history_len);
  const GaussianComponent old = m.components[c];
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double o = k == c ? 1.0 : 0.0;
    m.components[k].weight += (o - m.components[k].weight) / n;
  }
  const double eff = old.weight * n + 1.0;
  const double d = x - old.mean;
  auto& comp = m.components[c];
  comp.mean = old.mean + d / eff;
  comp.variance = old.variance + old.weight * n * d * d / (eff * eff) - old.variance / eff;
  comp.variance = std::max(comp.variance, kVarianceFloor);
  prune_and_normalize(m);
}

/// Variance of a new component built from a neighborhood of half-width eps.
inline double spawn_variance(int epsilon) {
  const double w = 2.0 * epsilon;
  return (w * w - 1.0) / 12.0;
}

/// Adds (1/N, x, ((2 eps)^2 - 1)/12) after scaling the existing weights by
/// (N - 1)/N, then prunes below 1/N and renormalizes.
inline void spawn_component(MixtureModel& m, double x, int epsilon_star) {
  const double n = static_cast<double>(m.history_len);
  for (auto& c : m.components) c.weight *= (n - 1.0) / n;
  m.components.push_back({1.0 / n, x, std::max(spawn_variance(epsilon_star), kVarianceFloor)});
  prune_and_normalize(m);
}

struct AdaptResult {
  Decision decision = Decision::matched;
  /// Matched component (index before any pruning).
  std::size_t component = 0;
  int epsilon = 1;
  double p_eps = 0.0;
};

/// One online step: match, eps* search, decide, then update or spawn.
/// Exact mode needs `pool` and appends x to it afterwards.
inline AdaptResult adapt(MixtureModel& m, double x, const AdaptationConfig& cfg, HistoryPool* pool = nullptr) {
  AdaptResult r;
  const Match match = match_component(m, x);
  r.component = match.index;
  EpsilonSearch search{cfg.epsilon_min, 0.0};
  if (cfg.mode == AdaptMode::exact_history) {
    if (pool == nullptr) throw std::invalid_argument("adapt: exact-history mode requires a history pool");
    if (!pool->empty()) search = epsilon_star_exact(*pool, x, cfg);
  } else {
    search = epsilon_star_approx(m, match.index, x, cfg);
  }
  r.epsilon = search.epsilon;
  r.p_eps = search.probability;
  r.decision = decide(m, match.index, x, search.probability);
  if (r.decision == Decision::matched) {
    update_matched(m, match.index, x);
  } else {
    spawn_component(m, x, search.epsilon);
  }
  if (cfg.mode == AdaptMode::exact_history) pool->push(x);
  return r;
}

}  // namespace thermobg
