#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <gtest/gtest.h>

#include "thermobg/rng.hpp"
#include "thermobg/special.hpp"

using namespace thermobg;

TEST(Digamma, KnownConstants) {
  const double gamma = 0.57721566490153286061;
  EXPECT_NEAR(digamma(1.0), -gamma, 1e-13);
  EXPECT_NEAR(digamma(0.5), -gamma - 2.0 * std::log(2.0), 1e-13);
  EXPECT_NEAR(digamma(2.0), 1.0 - gamma, 1e-13);
  EXPECT_NEAR(digamma(1.0), -0.5772156649, 1e-10);
  EXPECT_NEAR(digamma(0.5), -1.9635100260, 1e-10);
  EXPECT_NEAR(digamma(2.0), 0.4227843351, 1e-10);
}

TEST(Digamma, MatchesBoostAcrossRange) {
  Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    // log-uniform over [1e-4, 1e6]
    const double a = std::pow(10.0, -4.0 + 10.0 * rng.uniform());
    const double want = boost::math::digamma(a);
    EXPECT_NEAR(digamma(a), want, 1e-12 * std::max(1.0, std::abs(want))) << "a=" << a;
  }
}

TEST(Digamma, Recurrence) {
  for (double a : {0.01, 0.3, 1.7, 9.99, 10.0, 42.5}) {
    EXPECT_NEAR(digamma(a + 1.0), digamma(a) + 1.0 / a, 1e-12 * std::max(1.0, 1.0 / a));
  }
}

TEST(Digamma, RejectsNonPositive) {
  EXPECT_THROW(digamma(0.0), std::domain_error);
  EXPECT_THROW(digamma(-1.5), std::domain_error);
}

TEST(NormalCdf, SymmetryAndLimits) {
  EXPECT_DOUBLE_EQ(standard_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(standard_normal_cdf(1.0) - standard_normal_cdf(-1.0), 0.6826894921, 1e-10);
  EXPECT_EQ(standard_normal_cdf(-std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_EQ(standard_normal_cdf(std::numeric_limits<double>::infinity()), 1.0);
}

TEST(NormalCdf, MatchesBoostErfc) {
  for (double z = -30.0; z <= 30.0; z += 0.173) {
    const double want = 0.5 * boost::math::erfc(-z / std::sqrt(2.0));
    EXPECT_NEAR(standard_normal_cdf(z), want, 1e-15 + 1e-13 * want) << "z=" << z;
  }
}

TEST(NormalMass, UpperTailKeepsRelativePrecision) {
  // Mass of [8, 9] is ~6e-16; naive cdf differences round to 0 there.
  const double want = 0.5 * (boost::math::erfc(8.0 / std::sqrt(2.0)) - boost::math::erfc(9.0 / std::sqrt(2.0)));
  EXPECT_NEAR(standard_normal_mass(8.0, 9.0), want, 1e-10 * want);
  EXPECT_NEAR(standard_normal_mass(-9.0, -8.0), want, 1e-10 * want);
  EXPECT_EQ(standard_normal_mass(2.0, 1.0), 0.0);
}
