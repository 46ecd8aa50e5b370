#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace thermobg {

/// Digamma function Psi(a) for a > 0.
///
/// Shifts the argument upward with Psi(a) = Psi(a + 1) - 1/a until a >= 10,
/// then evaluates the Bernoulli asymptotic series. Truncation error at a = 10
/// is below 1e-17, so the result is limited by the recurrence roundoff.
inline double digamma(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("digamma: argument must be positive and finite");
  }
  double shift = 0.0;
  while (a < 10.0) {
    shift -= 1.0 / a;
    a += 1.0;
  }
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  // B_2k / (2k) for k = 1..7
  const double series =
      inv2 * (1.0 / 12.0 -
      inv2 * (1.0 / 120.0 -
      inv2 * (1.0 / 252.0 -
      inv2 * (1.0 / 240.0 -
      inv2 * (1.0 / 132.0 -
      inv2 * (691.0 / 32760.0 -
      inv2 * (1.0 / 12.0)))))));
  return shift + std::log(a) - 0.5 * inv - series;
}

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
inline double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Mass of N(0, 1) on [lo, hi]. Subtracts in the tail that keeps precision.
inline double standard_normal_mass(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo >= 0.0) {
    // upper tail: Q(lo) - Q(hi)
    return 0.5 * (std::erfc(lo / std::numbers::sqrt2) - std::erfc(hi / std::numbers::sqrt2));
  }
  if (hi <= 0.0) {
    return 0.5 * (std::erfc(-hi / std::numbers::sqrt2) - std::erfc(-lo / std::numbers::sqrt2));
  }
  return 1.0 - 0.5 * (std::erfc(-lo / std::numbers::sqrt2) + std::erfc(hi / std::numbers::sqrt2));
}

}  // namespace thermobg
