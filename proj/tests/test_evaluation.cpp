#include <cmath>

#include <gtest/gtest.h>

#include "thermobg/evaluation.hpp"
#include "thermobg/rng.hpp"

using namespace thermobg;

namespace {

MaskFrame labels(int w, int h, std::initializer_list<std::pair<int, Label>> set) {
  MaskFrame m(w, h);
  for (auto [i, l] : set) m.labels[static_cast<std::size_t>(i)] = l;
  return m;
}

}  // namespace

TEST(Accumulate, PerfectPrediction) {
  MaskFrame gt(20, 20);
  for (int i = 0; i < 100; ++i) gt.labels[static_cast<std::size_t>(i)] = Label::foreground;
  const auto c = accumulate(gt, gt);
  EXPECT_EQ(c, (ConfusionCounts{100, 0, 300, 0}));
}

TEST(Accumulate, AllBackgroundPrediction) {
  MaskFrame gt(10, 10);
  for (int i = 0; i < 40; ++i) gt.labels[static_cast<std::size_t>(i)] = Label::foreground;
  EXPECT_EQ(accumulate(MaskFrame(10, 10), gt).fn, 40u);
}

TEST(Accumulate, IgnoreAndDimensionChecks) {
  const auto gt = labels(2, 1, {{0, Label::ignore}, {1, Label::foreground}});
  const auto pred = labels(2, 1, {{0, Label::foreground}, {1, Label::foreground}});
  EXPECT_EQ(accumulate(pred, gt), (ConfusionCounts{1, 0, 0, 0}));
  EXPECT_THROW(accumulate(MaskFrame(3, 1), gt), std::invalid_argument);
}

TEST(Accumulate, MatchesNaiveTally) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    MaskFrame pred(8, 8), gt(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        pred.at(x, y) = rng.below(2) ? Label::foreground : Label::background;
        const auto g = rng.below(5);
        gt.at(x, y) = g == 0 ? Label::ignore : g < 3 ? Label::foreground : Label::background;
      }
    }
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const Label p = pred.at(x, y), g = gt.at(x, y);
        if (g == Label::ignore) continue;
        if (p == Label::foreground && g == Label::foreground) ++tp;
        if (p == Label::foreground && g == Label::background) ++fp;
        if (p == Label::background && g == Label::background) ++tn;
        if (p == Label::background && g == Label::foreground) ++fn;
      }
    }
    EXPECT_EQ(accumulate(pred, gt), (ConfusionCounts{tp, fp, tn, fn}));
  }
}

TEST(Metrics, HandArithmetic) {
  const auto m = metrics({50, 50, 100, 0});
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.pwc, 25.0);
  EXPECT_TRUE(m.undefined.empty());
}

TEST(Metrics, Perfect) {
  const auto m = metrics({10, 0, 90, 0});
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_EQ(m.fpr, 0.0);
  EXPECT_EQ(m.fnr, 0.0);
  EXPECT_EQ(m.pwc, 0.0);
}

TEST(Metrics, NoPositivesFlagsUndefined) {
  const auto m = metrics({0, 3, 97, 0});
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_NE(std::find(m.undefined.begin(), m.undefined.end(), "recall"), m.undefined.end());
  EXPECT_NEAR(m.specificity, 0.97, 1e-15);
}

TEST(Metrics, IdentitiesOnRandomCounts) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const ConfusionCounts c{rng.below(1000), rng.below(1000), rng.below(100000), rng.below(1000)};
    const auto m = metrics(c);
    if (c.tn + c.fp > 0) {
      EXPECT_NEAR(m.specificity + m.fpr, 1.0, 1e-12);
    }
    if (c.tp + c.fn > 0) {
      EXPECT_NEAR(m.recall + m.fnr, 1.0, 1e-12);
    }
    if (m.undefined.empty()) {
      EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-15);
      EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-15);
    }
  }
}

TEST(Metrics, CountsAreAdditive) {
  const ConfusionCounts a{1, 2, 3, 4}, b{10, 20, 30, 40};
  EXPECT_EQ(a + b, (ConfusionCounts{11, 22, 33, 44}));
}

TEST(Report, FlatJsonKeys) {
  const ConfusionCounts c{5, 1, 90, 4};
  const auto j = to_json(c, metrics(c));
  for (const char* k : {"precision", "recall", "f1", "specificity", "fpr", "fnr", "pwc", "tp", "fp", "tn", "fn"}) {
    EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_FALSE(j[k].is_object());
  }
  EXPECT_EQ(j["tp"], 5);
}
