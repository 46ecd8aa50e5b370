#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "thermobg/mixture.hpp"
#include "thermobg/rng.hpp"

using namespace thermobg;

namespace {

MixtureModel random_model(Rng& rng, int k) {
  MixtureModel m;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = 0.05 + rng.uniform();
    m.components.push_back({w, 255.0 * rng.uniform(), 0.5 + 30.0 * rng.uniform()});
    total += w;
  }
  for (auto& c : m.components) c.weight /= total;
  return m;
}

}  // namespace

TEST(GaussianPdf, Constants) {
  EXPECT_NEAR(gaussian_pdf(0.0, 0.0, 1.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(gaussian_pdf(0.0, 0.0, 1.0), 0.3989422804, 1e-10);
  EXPECT_NEAR(gaussian_pdf(5.0, 5.0, 4.0), 0.1994711402, 1e-10);
}

TEST(GaussianPdf, FarTailUnderflowsWithoutNaN) {
  const double p = gaussian_pdf(40.0, 0.0, 1.0);
  EXPECT_FALSE(std::isnan(p));
  EXPECT_GE(p, 0.0);
  EXPECT_LT(p, 1e-300);
  EXPECT_EQ(gaussian_pdf(1e6, 0.0, 1.0), 0.0);
}

TEST(GaussianPdf, LogAgreesWithLinear) {
  for (double x : {-3.0, 0.0, 1.5, 7.0}) {
    EXPECT_NEAR(std::exp(log_gaussian_pdf(x, 1.0, 2.5)), gaussian_pdf(x, 1.0, 2.5), 1e-15);
  }
}

TEST(GaussianPdf, RejectsNonPositiveVariance) {
  EXPECT_THROW(gaussian_pdf(0.0, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(gaussian_pdf(0.0, 0.0, -1.0), std::domain_error);
  EXPECT_THROW(gaussian_cdf(0.0, 0.0, 0.0), std::domain_error);
}

TEST(GaussianCdf, Values) {
  EXPECT_DOUBLE_EQ(gaussian_cdf(3.0, 3.0, 9.0), 0.5);
  EXPECT_NEAR(gaussian_cdf(4.0, 2.0, 4.0) - gaussian_cdf(0.0, 2.0, 4.0), 0.6826894921, 1e-10);
  EXPECT_EQ(gaussian_cdf(-std::numeric_limits<double>::infinity(), 0.0, 1.0), 0.0);
}

TEST(MixtureDensity, SingleComponentReducesToGaussian) {
  MixtureModel m;
  m.components.push_back({1.0, 10.0, 1.0});
  EXPECT_NEAR(mixture_density(m, 10.0), 0.3989422804, 1e-10);
}

TEST(MixtureDensity, TwoComponentsDirectSum) {
  MixtureModel m;
  m.components.push_back({0.5, 0.0, 1.0});
  m.components.push_back({0.5, 10.0, 1.0});
  const double tail = std::exp(-12.5) / std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(mixture_density(m, 5.0), tail, 1e-18);
}

TEST(MixtureDensity, IntegratesToOne) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MixtureModel m = random_model(rng, 1 + static_cast<int>(rng.below(5)));
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& c : m.components) {
      lo = std::min(lo, c.mean - 12.0 * c.stddev());
      hi = std::max(hi, c.mean + 12.0 * c.stddev());
    }
    // Composite Simpson on a fine grid.
    const int n = 200000;
    const double h = (hi - lo) / n;
    double s = mixture_density(m, lo) + mixture_density(m, hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * mixture_density(m, lo + i * h);
    EXPECT_NEAR(s * h / 3.0, 1.0, 1e-6);
  }
}

TEST(MixtureDensity, LogFormMatchesFarFromComponents) {
  Rng rng(5);
  const MixtureModel m = random_model(rng, 3);
  for (double x : {-50.0, 0.0, 100.0, 300.0}) {
    const double d = mixture_density(m, x);
    if (d > 1e-280) {
      EXPECT_NEAR(log_mixture_density(m, x), std::log(d), 1e-10);
    }
  }
  // Where the linear form underflows the log form stays finite.
  EXPECT_TRUE(std::isfinite(log_mixture_density(m, 1e5)));
}

TEST(PruneAndNormalize, DropsLightComponentsAndRenormalizes) {
  MixtureModel m;
  m.history_len = 100;
  m.components = {{0.7, 10.0, 1.0}, {0.295, 50.0, 1.0}, {0.005, 90.0, 1.0}};
  prune_and_normalize(m);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(weight_sum(m), 1.0, 1e-15);
  EXPECT_NEAR(m.components[0].weight, 0.7 / 0.995, 1e-15);
}

TEST(PruneAndNormalize, KeepsExactlyOneOverN) {
  MixtureModel m;
  m.history_len = 100;
  m.components = {{0.99, 10.0, 1.0}, {0.01 * (1.0 - 1e-15), 50.0, 1.0}};
  prune_and_normalize(m);
  EXPECT_EQ(m.size(), 2u);
}

TEST(PruneAndNormalize, HeaviestAlwaysSurvives) {
  MixtureModel m;
  m.history_len = 100;
  m.components = {{0.001, 10.0, 1.0}, {0.004, 50.0, 1.0}};
  prune_and_normalize(m);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.components[0].mean, 50.0);
  EXPECT_DOUBLE_EQ(m.components[0].weight, 1.0);
}

TEST(PruneAndNormalize, FloorsVariance) {
  MixtureModel m;
  m.components = {{1.0, 10.0, 1e-9}};
  prune_and_normalize(m);
  EXPECT_EQ(m.components[0].variance, kVarianceFloor);
  EXPECT_TRUE(is_valid(m));
}

TEST(IsValid, DetectsBrokenModels) {
  MixtureModel m;
  EXPECT_FALSE(is_valid(m));
  m.components = {{0.6, 1.0, 1.0}, {0.3, 2.0, 1.0}};
  EXPECT_FALSE(is_valid(m));
  m.components[1].weight = 0.4;
  EXPECT_TRUE(is_valid(m));
  m.components[1].variance = 0.0;
  EXPECT_FALSE(is_valid(m));
}
