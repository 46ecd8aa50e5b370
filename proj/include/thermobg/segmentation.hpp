#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "thermobg/adaptation.hpp"
#include "thermobg/frame.hpp"
#include "thermobg/mixture.hpp"

namespace thermobg {

struct SegmentationConfig {
  double p_bg = 0.6;
  double decision_threshold = 0.5;
  int min_blob_area = 15;
  int connectivity = 8;

  void validate() const {
    if (!(p_bg > 0.5 && p_bg < 1.0)) throw std::invalid_argument("SegmentationConfig: p_bg must lie in (0.5, 1)");
    if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
      throw std::invalid_argument("SegmentationConfig: decision_threshold must lie in (0, 1)");
    }
    if (min_blob_area < 0) throw std::invalid_argument("SegmentationConfig: min_blob_area must be >= 0");
    if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("SegmentationConfig: connectivity must be 4 or 8");
  }
};

/// p(bg | x) = p(x | bg) p_bg / (p(x | bg) + p(x | fg)) with the foreground
/// modeled as uniform over the L intensity levels. The denominator carries no
/// prior weights; the result is clamped to [0, 1].
inline double posterior_from_density(double density_bg, int intensity_levels, double p_bg) {
  const double fg = 1.0 / static_cast<double>(intensity_levels);
  const double p = density_bg * p_bg / (density_bg + fg);
  return std::clamp(p, 0.0, 1.0);
}

inline double posterior_bg(const MixtureModel& m, double x, const SegmentationConfig& cfg) {
  return posterior_from_density(mixture_density(m, x), m.intensity_levels, cfg.p_bg);
}

inline Label label_from_posterior(double posterior, const SegmentationConfig& cfg) {
  return posterior >= cfg.decision_threshold ? Label::background : Label::foreground;
}

inline Label classify_pixel(const MixtureModel& m, double x, const SegmentationConfig& cfg) {
  return label_from_posterior(posterior_bg(m, x, cfg), cfg);
}

/// Relabels foreground blobs smaller than min_blob_area as background.
/// Ignore labels are neither blob members nor changed.
inline MaskFrame blob_filter(const MaskFrame& mask, const SegmentationConfig& cfg) {
  MaskFrame out = mask;
  if (cfg.min_blob_area <= 1) return out;
  const int w = mask.width;
  const int h = mask.height;
  std::vector<char> seen(mask.size(), 0);
  std::vector<std::size_t> blob;
  std::vector<std::size_t> stack;
  const int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
  const int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
  const int dx4[] = {0, -1, 1, 0};
  const int dy4[] = {-1, 0, 0, 1};
  const int* dx = cfg.connectivity == 8 ? dx8 : dx4;
  const int* dy = cfg.connectivity == 8 ? dy8 : dy4;

  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (seen[start] || mask.labels[start] != Label::foreground) continue;
    blob.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      blob.push_back(p);
      const int px = static_cast<int>(p % static_cast<std::size_t>(w));
      const int py = static_cast<int>(p / static_cast<std::size_t>(w));
      for (int i = 0; i < cfg.connectivity; ++i) {
        const int qx = px + dx[i];
        const int qy = py + dy[i];
        if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
        const std::size_t q = static_cast<std::size_t>(qy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(qx);
        if (seen[q] || mask.labels[q] != Label::foreground) continue;
        seen[q] = 1;
        stack.push_back(q);
      }
    }
    if (blob.size() < static_cast<std::size_t>(cfg.min_blob_area)) {
      for (std::size_t p : blob) out.labels[p] = Label::background;
    }
  }
  return out;
}

/// Standing-object trace: a pixel whose background sits far away suddenly
/// shows a constant intensity. The first frame spawns a component with a
/// fixed eps*, later frames run the online update.
struct SwitchScenario {
  double p_bg = 0.6;
  double threshold = 0.5;
  int history_len = 100;
  int epsilon_star = 2;
  int intensity_levels = 256;
  double background_mean = 60.0;
  double background_variance = 4.0;
  double object_intensity = 150.0;
  int horizon = 10000;
};

/// Frame index (0 = the frame the object appears) at which the pixel is first
/// classified as background; nullopt if that does not happen within the horizon.
inline std::optional<int> frames_to_background(const SwitchScenario& s) {
  SegmentationConfig seg;
  seg.p_bg = s.p_bg;
  seg.decision_threshold = s.threshold;
  MixtureModel m;
  m.history_len = s.history_len;
  m.intensity_levels = s.intensity_levels;
  m.components.push_back({1.0, s.background_mean, s.background_variance});

  const AdaptationConfig adapt_cfg;
  for (int t = 0; t <= s.horizon; ++t) {
    if (posterior_bg(m, s.object_intensity, seg) >= s.threshold) return t;
    if (t == 0) {
      spawn_component(m, s.object_intensity, s.epsilon_star);
    } else {
      adapt(m, s.object_intensity, adapt_cfg);
    }
  }
  return std::nullopt;
}

}  // namespace thermobg
