#pragma once

// Full-frame orchestration: one mixture per pixel, batch initialization from
// the first N frames, then classify + adapt for every streamed frame.
//
// Pixels never share state. Work is split into contiguous pixel ranges, one
// per worker, so results are bit-identical for any worker count. Blob
// filtering runs after every pixel of the frame is done.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "thermobg/adaptation.hpp"
#include "thermobg/frame.hpp"
#include "thermobg/mixture.hpp"
#include "thermobg/rng.hpp"
#include "thermobg/segmentation.hpp"
#include "thermobg/variational.hpp"

namespace thermobg {

struct EngineConfig {
  FitConfig fit;
  AdaptationConfig adapt;
  SegmentationConfig seg;

  void validate() const {
    fit.validate();
    adapt.validate();
    seg.validate();
  }
};

struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<MixtureModel> models;
  EngineConfig config;
  /// One sliding window per pixel in exact-history mode; empty otherwise.
  std::vector<HistoryPool> pools;

  std::size_t size() const { return models.size(); }
  int history_len() const { return models.empty() ? static_cast<int>(config.fit.history_len) : models.front().history_len; }
  int intensity_levels() const { return models.empty() ? config.fit.intensity_levels : models.front().intensity_levels; }

  /// Model state only (dimensions and per-pixel mixtures).
  friend bool operator==(const PixelGrid& a, const PixelGrid& b) {
    return a.width == b.width && a.height == b.height && a.models == b.models;
  }
};

/// Runs fn(begin, end) over [0, n) split into `workers` contiguous ranges.
/// Exceptions from workers are rethrown on the calling thread.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct InitReport {
  std::size_t unconverged = 0;
  /// component_histogram[k] = number of pixels with k components.
  std::vector<std::size_t> component_histogram;
};

inline std::vector<std::size_t> component_histogram(const PixelGrid& grid) {
  std::vector<std::size_t> hist;
  for (const auto& m : grid.models) {
    if (hist.size() <= m.size()) hist.resize(m.size() + 1, 0);
    ++hist[m.size()];
  }
  return hist;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Fits every pixel's mixture from exactly N = cfg.fit.history_len frames.
/// Pixel p uses the seed substream (cfg.fit.rng_seed, p).
inline PixelGrid initialize_grid(const FrameSequence& history, const EngineConfig& cfg, int workers = 1,
                                 InitReport* report = nullptr, const ProgressFn& progress = {}) {
  cfg.validate();
  if (history.size() != cfg.fit.history_len) {
    throw std::invalid_argument("initialize_grid: expected " + std::to_string(cfg.fit.history_len) +
                                " history frames, got " + std::to_string(history.size()));
  }
  history.check_uniform();

  PixelGrid grid;
  grid.width = history.width();
  grid.height = history.height();
  grid.config = cfg;
  grid.config.fit.intensity_levels = history.frames.front().intensity_levels();
  const std::size_t n_pixels = static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height);
  grid.models.resize(n_pixels);
  if (cfg.adapt.mode == AdaptMode::exact_history) grid.pools.assign(n_pixels, HistoryPool(cfg.fit.history_len));

  std::vector<std::uint8_t> converged(n_pixels, 0);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(n_pixels, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> samples(history.size());
    FitConfig fc = grid.config.fit;
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t t = 0; t < history.size(); ++t) samples[t] = history.frames[t].pixels[p];
      fc.rng_seed = Rng::substream(cfg.fit.rng_seed, p).next();
      auto res = fit(samples, fc);
      grid.models[p] = std::move(res.model);
      converged[p] = res.converged ? 1 : 0;
      if (!grid.pools.empty()) {
        for (double x : samples) grid.pools[p].push(x);
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress && (d % 4096 == 0 || d == n_pixels)) {
        std::lock_guard lock(progress_mutex);
        progress(d, n_pixels);
      }
    }
  });

  if (report != nullptr) {
    report->unconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
    report->component_histogram = component_histogram(grid);
  }
  return grid;
}

/// Classifies pixel p against its current model, then (unless frozen) adapts
/// the model to x. Returns p(bg | x).
inline double classify_and_adapt(PixelGrid& grid, std::size_t p, double x, bool freeze = false) {
  MixtureModel& m = grid.models[p];
  const double post = posterior_bg(m, x, grid.config.seg);
  if (!freeze) {
    HistoryPool* pool = grid.pools.empty() ? nullptr : &grid.pools[p];
    adapt(m, x, grid.config.adapt, pool);
  }
  return post;
}

/// Per-pixel labels before blob filtering.
inline MaskFrame segment_frame(PixelGrid& grid, const Frame& frame, int workers = 1, bool freeze = false) {
  if (frame.width != grid.width || frame.height != grid.height) {
    throw std::invalid_argument("process_frame: frame is " + std::to_string(frame.width) + "x" +
                                std::to_string(frame.height) + ", model grid is " + std::to_string(grid.width) + "x" +
                                std::to_string(grid.height));
  }
  if (frame.intensity_levels() != grid.intensity_levels()) {
    throw std::invalid_argument("process_frame: frame bit depth does not match the model");
  }
  MaskFrame mask(grid.width, grid.height);
  mask.posterior.assign(mask.size(), 0.0);
  parallel_for(grid.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const double post = classify_and_adapt(grid, p, frame.pixels[p], freeze);
      mask.posterior[p] = post;
      mask.labels[p] = label_from_posterior(post, grid.config.seg);
    }
  });
  return mask;
}

inline MaskFrame process_frame(PixelGrid& grid, const Frame& frame, int workers = 1, bool freeze = false) {
  return blob_filter(segment_frame(grid, frame, workers, freeze), grid.config.seg);
}

// ---------------------------------------------------------------------------
// VIMM1 persistence
//
//   VIMM1 <width> <height> <N> <levels>\n
//   K w_1 mu_1 var_1 ... w_K mu_K var_K\n      (one line per pixel, row-major)
//
// Reals use 17 significant digits, so save -> load is bit-exact.

class GridParseError : public std::runtime_error {
 public:
  GridParseError(const std::string& what, std::size_t offset, long pixel)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset) +
                           (pixel >= 0 ? " (pixel " + std::to_string(pixel) + ")" : std::string())),
        offset_(offset),
        pixel_(pixel) {}

  std::size_t offset() const { return offset_; }
  /// -1 when the error is in the header.
  long pixel() const { return pixel_; }

 private:
  std::size_t offset_;
  long pixel_;
};

namespace detail {

inline void append_real(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

class VimmReader {
 public:
  explicit VimmReader(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  std::string_view token(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what + (pos_ >= text_.size() ? " (truncated file)" : ""), start);
    return text_.substr(start, pos_ - start);
  }

  long integer(const char* what) {
    const std::size_t start = (skip_space(), pos_);
    const auto tok = token(what);
    long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail(std::string("invalid ") + what, start);
    return v;
  }

  double real(const char* what) {
    const std::size_t start = (skip_space(), pos_);
    const auto tok = token(what);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      fail(std::string("invalid ") + what, start);
    }
    return v;
  }

  void end_line() {
    skip_space();
    if (pos_ >= text_.size()) fail("truncated file, expected end of line", pos_);
    if (text_[pos_] != '\n') fail("unexpected trailing data", pos_);
    ++pos_;
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

  std::size_t offset() const { return pos_; }
  void set_pixel(long p) { pixel_ = p; }

  [[noreturn]] void fail(const std::string& what, std::size_t at) const { throw GridParseError(what, at, pixel_); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  long pixel_ = -1;
};

}  // namespace detail

inline std::string serialize_grid(const PixelGrid& grid) {
  std::string out = "VIMM1 " + std::to_string(grid.width) + " " + std::to_string(grid.height) + " " +
                    std::to_string(grid.history_len()) + " " + std::to_string(grid.intensity_levels()) + "\n";
  for (const auto& m : grid.models) {
    out += std::to_string(m.size());
    for (const auto& c : m.components) {
      for (double v : {c.weight, c.mean, c.variance}) {
        out += ' ';
        detail::append_real(out, v);
      }
    }
    out += '\n';
  }
  return out;
}

/// Parses VIMM1 text. `config` seeds the engine settings of the returned grid;
/// N and the intensity levels come from the file.
inline PixelGrid parse_grid(std::string_view text, const EngineConfig& config = {}) {
  detail::VimmReader r(text);
  const std::size_t magic_at = r.offset();
  if (r.token("magic") != "VIMM1") r.fail("bad magic, expected VIMM1", magic_at);
  const long width = r.integer("width");
  const long height = r.integer("height");
  const long history = r.integer("history length");
  const long levels = r.integer("intensity levels");
  if (width <= 0 || height <= 0 || history <= 0 || levels < 2) r.fail("invalid header values", 0);
  r.end_line();

  PixelGrid grid;
  grid.width = static_cast<int>(width);
  grid.height = static_cast<int>(height);
  grid.config = config;
  grid.config.fit.history_len = static_cast<std::size_t>(history);
  grid.config.fit.k_max = std::min(grid.config.fit.k_max, grid.config.fit.history_len);
  grid.config.fit.intensity_levels = static_cast<int>(levels);
  const std::size_t n_pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  grid.models.resize(n_pixels);
  for (std::size_t p = 0; p < n_pixels; ++p) {
    r.set_pixel(static_cast<long>(p));
    const std::size_t k_at = (r.skip_space(), r.offset());
    const long k = r.integer("component count");
    if (k < 1 || k > history) r.fail("component count out of range", k_at);
    auto& m = grid.models[p];
    m.history_len = static_cast<int>(history);
    m.intensity_levels = static_cast<int>(levels);
    m.components.resize(static_cast<std::size_t>(k));
    for (auto& c : m.components) {
      c.weight = r.real("weight");
      c.mean = r.real("mean");
      const std::size_t var_at = (r.skip_space(), r.offset());
      c.variance = r.real("variance");
      if (!(c.variance > 0.0)) r.fail("non-positive variance", var_at);
    }
    r.end_line();
  }
  r.set_pixel(-1);
  if (!r.at_end()) r.fail("unexpected data after the last pixel", r.offset());
  if (config.adapt.mode == AdaptMode::exact_history) grid.pools.assign(n_pixels, HistoryPool(grid.config.fit.history_len));
  return grid;
}

inline void save_grid(const PixelGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string text = serialize_grid(grid);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline PixelGrid load_grid(const std::filesystem::path& path, const EngineConfig& config = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str(), config);
}

}  // namespace thermobg
