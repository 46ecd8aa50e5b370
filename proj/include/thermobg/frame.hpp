#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermobg {

/// One grayscale frame, row-major. Values are sensor counts in [0, max_value].
struct Frame {
  int width = 0;
  int height = 0;
  int max_value = 255;
  std::vector<std::uint16_t> pixels;

  Frame() = default;
  Frame(int w, int h, int maxval = 255)
      : width(w), height(h), max_value(maxval), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  std::size_t size() const { return pixels.size(); }
  int intensity_levels() const { return max_value + 1; }
  std::uint16_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  std::uint16_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct FrameSequence {
  std::vector<Frame> frames;
  /// Metadata only.
  double frame_rate = 0.0;
  /// Optional names (e.g. source file stems), parallel to `frames` when set.
  std::vector<std::string> names;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  int max_value() const { return frames.empty() ? 0 : frames.front().max_value; }

  /// Throws unless all frames share dimensions and depth.
  void check_uniform() const {
    for (const auto& f : frames) {
      if (f.width != width() || f.height != height() || f.max_value != max_value()) {
        throw std::invalid_argument("FrameSequence: frames differ in size or bit depth");
      }
    }
  }
};

enum class Label : std::uint8_t { background = 0, foreground = 1, ignore = 2 };

/// Per-pixel segmentation output; `posterior` is p(bg | x) when present.
struct MaskFrame {
  int width = 0;
  int height = 0;
  std::vector<Label> labels;
  std::vector<double> posterior;

  MaskFrame() = default;
  MaskFrame(int w, int h)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), Label::background) {}

  std::size_t size() const { return labels.size(); }
  Label& at(int x, int y) { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }

  std::size_t foreground_count() const {
    std::size_t n = 0;
    for (Label l : labels) n += l == Label::foreground ? 1 : 0;
    return n;
  }
};

}  // namespace thermobg
