#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermobg/frame.hpp"

namespace thermobg {

/// Pixel tallies with foreground as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Tallies pred against gt. Ground-truth pixels labeled ignore are skipped.
inline ConfusionCounts accumulate(const MaskFrame& pred, const MaskFrame& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw std::invalid_argument("accumulate: prediction is " + std::to_string(pred.width) + "x" +
                                std::to_string(pred.height) + ", ground truth is " + std::to_string(gt.width) + "x" +
                                std::to_string(gt.height));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.labels[i] == Label::ignore) continue;
    const bool p = pred.labels[i] == Label::foreground;
    const bool g = gt.labels[i] == Label::foreground;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double pwc = 0.0;
  /// Names of metrics whose denominator was zero (reported as 0).
  std::vector<std::string> undefined;
};

inline Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  auto ratio = [&m](double num, double den, const char* name) {
    if (den > 0.0) return num / den;
    m.undefined.emplace_back(name);
    return 0.0;
  };
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  m.precision = ratio(tp, tp + fp, "precision");
  m.recall = ratio(tp, tp + fn, "recall");
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, "f1");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.fpr = ratio(fp, fp + tn, "fpr");
  m.fnr = ratio(fn, tp + fn, "fnr");
  m.pwc = ratio(100.0 * (fn + fp), tp + fn + fp + tn, "pwc");
  return m;
}

/// Flat report: the seven metrics, raw counts and the undefined list.
inline nlohmann::json to_json(const ConfusionCounts& c, const Metrics& m) {
  return nlohmann::json{
      {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},       {"specificity", m.specificity},
      {"fpr", m.fpr},             {"fnr", m.fnr},       {"pwc", m.pwc},     {"tp", c.tp},
      {"fp", c.fp},               {"tn", c.tn},         {"fn", c.fn},       {"undefined", m.undefined},
  };
}

}  // namespace thermobg
