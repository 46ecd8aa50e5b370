#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermobg/special.hpp"

namespace thermobg {

/// Stored variances never drop below this (intensity^2 units).
inline constexpr double kVarianceFloor = 1e-4;

/// Relative slack on the 1/N pruning bound, absorbs renormalization roundoff.
inline constexpr double kPruneSlack = 1e-12;

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;

  double precision() const { return 1.0 / variance; }
  double stddev() const { return std::sqrt(variance); }

  friend bool operator==(const GaussianComponent&, const GaussianComponent&) = default;
};

/// Per-pixel background model: a 1-D Gaussian mixture plus the history
/// length N that drives the online update rates and the pruning bound.
struct MixtureModel {
  std::vector<GaussianComponent> components;
  int history_len = 100;
  int intensity_levels = 256;

  std::size_t size() const { return components.size(); }
  bool empty() const { return components.empty(); }
  double min_weight() const { return 1.0 / static_cast<double>(history_len); }

  friend bool operator==(const MixtureModel&, const MixtureModel&) = default;
};

inline void require_positive_variance(double var, const char* who) {
  if (!(var > 0.0)) {
    throw std::domain_error(std::string(who) + ": variance must be positive");
  }
}

inline double log_gaussian_pdf(double x, double mu, double var) {
  require_positive_variance(var, "log_gaussian_pdf");
  const double d = x - mu;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

inline double gaussian_pdf(double x, double mu, double var) {
  require_positive_variance(var, "gaussian_pdf");
  const double d = x - mu;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double gaussian_cdf(double x, double mu, double var) {
  require_positive_variance(var, "gaussian_cdf");
  return standard_normal_cdf((x - mu) / std::sqrt(var));
}

/// Probability mass of N(mu, var) on [lo, hi].
inline double gaussian_interval_mass(double lo, double hi, double mu, double var) {
  require_positive_variance(var, "gaussian_interval_mass");
  const double sd = std::sqrt(var);
  return standard_normal_mass((lo - mu) / sd, (hi - mu) / sd);
}

inline double mixture_density(const MixtureModel& m, double x) {
  double sum = 0.0;
  for (const auto& c : m.components) {
    sum += c.weight * gaussian_pdf(x, c.mean, c.variance);
  }
  return sum;
}

/// log of mixture_density via log-sum-exp; -inf for an empty model.
inline double log_mixture_density(const MixtureModel& m, double x) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(m.size());
  for (const auto& c : m.components) {
    if (c.weight <= 0.0) continue;
    terms.push_back(std::log(c.weight) + log_gaussian_pdf(x, c.mean, c.variance));
    best = std::max(best, terms.back());
  }
  if (terms.empty() || !std::isfinite(best)) return best;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - best);
  return best + std::log(acc);
}

inline double weight_sum(const MixtureModel& m) {
  double s = 0.0;
  for (const auto& c : m.components) s += c.weight;
  return s;
}

inline void normalize_weights(MixtureModel& m) {
  const double s = weight_sum(m);
  if (!(s > 0.0)) throw std::logic_error("normalize_weights: zero total weight");
  for (auto& c : m.components) c.weight /= s;
}

/// Drops components whose weight is below 1/N, renormalizes the rest to sum 1
/// and applies the variance floor. The heaviest component always survives.
inline void prune_and_normalize(MixtureModel& m) {
  if (m.empty()) throw std::logic_error("prune_and_normalize: empty model");
  const double bound = m.min_weight() * (1.0 - kPruneSlack);
  const auto heaviest = std::max_element(
      m.components.begin(), m.components.end(),
      [](const auto& a, const auto& b) { return a.weight < b.weight; });
  const GaussianComponent keep = *heaviest;
  std::erase_if(m.components, [bound](const auto& c) { return c.weight < bound; });
  if (m.empty()) m.components.push_back(keep);
  normalize_weights(m);
  for (auto& c : m.components) c.variance = std::max(c.variance, kVarianceFloor);
}

/// Checks the model invariants: 1 <= K, weights in [0,1] summing to 1 within
/// tol, every weight at least 1/N, variances positive and finite.
inline bool is_valid(const MixtureModel& m, double tol = 1e-9) {
  if (m.empty() || m.history_len <= 0 || m.intensity_levels <= 0) return false;
  const double bound = m.min_weight() * (1.0 - kPruneSlack) - tol;
  for (const auto& c : m.components) {
    if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.mean)) return false;
    if (c.weight < bound || c.weight > 1.0 + tol) return false;
  }
  return std::abs(weight_sum(m) - 1.0) <= tol;
}

}  // namespace thermobg
