#pragma once

// Seeded generators: sample sets drawn from Gaussian mixtures, and small
// videos with known ground truth (noisy static background, bimodal
// "swaying" regions, moving or standing foreground objects).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermobg/frame.hpp"
#include "thermobg/rng.hpp"

namespace thermobg {

struct GaussianSpec {
  double mean = 0.0;
  double stddev = 1.0;
  int count = 1;
};

/// Draws spec.count samples from each spec in order, concatenated.
inline std::vector<double> gen_mixture_samples(const std::vector<GaussianSpec>& specs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  for (const auto& s : specs) {
    if (!(s.stddev > 0.0)) throw std::invalid_argument("gen_mixture_samples: stddev must be positive");
    if (s.count < 0) throw std::invalid_argument("gen_mixture_samples: negative count");
    for (int i = 0; i < s.count; ++i) out.push_back(rng.normal(s.mean, s.stddev));
  }
  return out;
}

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};

/// Region whose pixels switch, frame by frame and all together, between two
/// intensity distributions (branches against sky).
struct BimodalRegion {
  Rect rect;
  GaussianSpec first;
  GaussianSpec second;
  double p_first = 0.5;
};

/// Foreground object present on frames [start, end). Its top-left corner
/// moves by (vx, vy) pixels per frame, rounded to the grid.
struct VideoEvent {
  Rect rect;
  GaussianSpec intensity;
  int start = 0;
  int end = 0;
  double vx = 0.0;
  double vy = 0.0;

  Rect at(int frame) const {
    const double dt = frame - start;
    return {rect.x + static_cast<int>(std::lround(vx * dt)), rect.y + static_cast<int>(std::lround(vy * dt)), rect.w, rect.h};
  }
  bool active(int frame) const { return frame >= start && frame < end; }
};

struct VideoScenario {
  int width = 64;
  int height = 48;
  int frames = 150;
  int bit_depth = 8;
  std::uint64_t seed = 1;
  double frame_rate = 7.5;
  GaussianSpec background{40.0, 1.5, 1};
  std::vector<BimodalRegion> regions;
  std::vector<VideoEvent> events;

  int max_value() const { return bit_depth == 16 ? 65535 : 255; }

  void validate() const {
    if (width <= 0 || height <= 0 || frames <= 0) throw std::invalid_argument("scenario: width, height and frames must be positive");
    if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("scenario: bit_depth must be 8 or 16");
    if (!(background.stddev > 0.0)) throw std::invalid_argument("scenario: background stddev must be positive");
    const Rect frame{0, 0, width, height};
    auto inside = [&frame](const Rect& r) {
      return r.w > 0 && r.h > 0 && r.x >= frame.x && r.y >= frame.y && r.x + r.w <= frame.w && r.y + r.h <= frame.h;
    };
    for (const auto& r : regions) {
      if (!inside(r.rect)) throw std::invalid_argument("scenario: region outside the frame");
      if (!(r.first.stddev > 0.0 && r.second.stddev > 0.0)) throw std::invalid_argument("scenario: region stddev must be positive");
      if (!(r.p_first >= 0.0 && r.p_first <= 1.0)) throw std::invalid_argument("scenario: region probability outside [0, 1]");
    }
    for (const auto& e : events) {
      if (!(e.intensity.stddev > 0.0)) throw std::invalid_argument("scenario: event stddev must be positive");
      if (e.start < 0 || e.end < e.start) throw std::invalid_argument("scenario: invalid event frame span");
      for (int t = e.start; t < std::min(e.end, frames); ++t) {
        if (!inside(e.at(t))) throw std::invalid_argument("scenario: event leaves the frame at frame " + std::to_string(t));
      }
    }
  }
};

struct SyntheticVideo {
  FrameSequence frames;
  std::vector<MaskFrame> ground_truth;
};

/// Renders the scenario. Pixel p draws its noise from substream (seed, p), so
/// the output does not depend on generation order.
inline SyntheticVideo gen_video(const VideoScenario& sc) {
  sc.validate();
  const std::size_t n_pixels = static_cast<std::size_t>(sc.width) * static_cast<std::size_t>(sc.height);
  std::vector<Rng> pixel_rng;
  pixel_rng.reserve(n_pixels);
  for (std::size_t p = 0; p < n_pixels; ++p) pixel_rng.push_back(Rng::substream(sc.seed, p));
  std::vector<Rng> region_rng;
  for (std::size_t r = 0; r < sc.regions.size(); ++r) region_rng.push_back(Rng::substream(sc.seed ^ 0x5eed5eedULL, r));

  const double maxval = sc.max_value();
  auto quantize = [maxval](double v) { return static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, maxval)); };

  SyntheticVideo out;
  out.frames.frame_rate = sc.frame_rate;
  std::vector<const GaussianSpec*> region_spec(sc.regions.size());
  for (int t = 0; t < sc.frames; ++t) {
    for (std::size_t r = 0; r < sc.regions.size(); ++r) {
      region_spec[r] = region_rng[r].uniform() < sc.regions[r].p_first ? &sc.regions[r].first : &sc.regions[r].second;
    }
    Frame f(sc.width, sc.height, sc.max_value());
    MaskFrame gt(sc.width, sc.height);
    for (int y = 0; y < sc.height; ++y) {
      for (int x = 0; x < sc.width; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(sc.width) + static_cast<std::size_t>(x);
        Rng& rng = pixel_rng[p];
        const double bg_noise = rng.normal();
        const double fg_noise = rng.normal();
        const GaussianSpec* spec = &sc.background;
        for (std::size_t r = 0; r < sc.regions.size(); ++r) {
          if (sc.regions[r].rect.contains(x, y)) spec = region_spec[r];
        }
        double value = spec->mean + spec->stddev * bg_noise;
        for (const auto& e : sc.events) {
          if (e.active(t) && e.at(t).contains(x, y)) {
            value = e.intensity.mean + e.intensity.stddev * fg_noise;
            gt.labels[p] = Label::foreground;
          }
        }
        f.pixels[p] = quantize(value);
      }
    }
    out.frames.frames.push_back(std::move(f));
    out.ground_truth.push_back(std::move(gt));
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d", t);
    out.frames.names.emplace_back(name);
  }
  return out;
}

/// Parses the key-value scenario format:
///
///   # comment
///   width = 64
///   height = 48
///   frames = 200
///   bit_depth = 8
///   seed = 7
///   frame_rate = 7.5
///   background = <mean> <stddev>
///   region = <x> <y> <w> <h> <mean1> <sd1> <mean2> <sd2> [p_first]
///   event = <x> <y> <w> <h> <mean> <sd> <start> <end> [vx vy]
///   mixture = <mean> <sd> <count>
///   update = <mean> <sd> <count>
///
/// region, event, mixture and update may repeat. mixture/update lines feed
/// the sample-level experiments and are ignored by gen_video.
struct ScenarioFile {
  VideoScenario video;
  std::vector<GaussianSpec> mixture;
  std::vector<GaussianSpec> update;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ScenarioFile parse_scenario(std::istream& in) {
  ScenarioFile sf;
  std::string line;
  int line_no = 0;
  auto fail = [&line_no](const std::string& what) -> void {
    throw ScenarioError("scenario line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream vs(line.substr(eq + 1));
    std::vector<double> v;
    double d = 0.0;
    while (vs >> d) v.push_back(d);
    if (!vs.eof()) fail("non-numeric value for '" + key + "'");
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (v.size() < lo || v.size() > hi) fail("wrong number of values for '" + key + "'");
    };
    auto as_int = [](double x) { return static_cast<int>(std::lround(x)); };

    if (key == "width") { need(1, 1); sf.video.width = as_int(v[0]); }
    else if (key == "height") { need(1, 1); sf.video.height = as_int(v[0]); }
    else if (key == "frames") { need(1, 1); sf.video.frames = as_int(v[0]); }
    else if (key == "bit_depth") { need(1, 1); sf.video.bit_depth = as_int(v[0]); }
    else if (key == "seed") { need(1, 1); sf.video.seed = static_cast<std::uint64_t>(v[0]); }
    else if (key == "frame_rate") { need(1, 1); sf.video.frame_rate = v[0]; }
    else if (key == "background") { need(2, 2); sf.video.background = {v[0], v[1], 1}; }
    else if (key == "region") {
      need(8, 9);
      BimodalRegion r{{as_int(v[0]), as_int(v[1]), as_int(v[2]), as_int(v[3])}, {v[4], v[5], 1}, {v[6], v[7], 1}, 0.5};
      if (v.size() == 9) r.p_first = v[8];
      sf.video.regions.push_back(r);
    } else if (key == "event") {
      need(8, 10);
      if (v.size() == 9) fail("event velocity needs both vx and vy");
      VideoEvent e{{as_int(v[0]), as_int(v[1]), as_int(v[2]), as_int(v[3])}, {v[4], v[5], 1}, as_int(v[6]), as_int(v[7]), 0.0, 0.0};
      if (v.size() == 10) {
        e.vx = v[8];
        e.vy = v[9];
      }
      sf.video.events.push_back(e);
    } else if (key == "mixture" || key == "update") {
      need(3, 3);
      if (!(v[1] > 0.0) || v[2] < 1) fail("'" + key + "' needs stddev > 0 and count >= 1");
      (key == "mixture" ? sf.mixture : sf.update).push_back({v[0], v[1], as_int(v[2])});
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  try {
    sf.video.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return sf;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path);
  return parse_scenario(in);
}

}  // namespace thermobg
