#pragma once

// Binary PGM (P5) and headerless raw frame I/O.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermobg/frame.hpp"

namespace thermobg {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Endianness { little, big };

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Reads one unsigned header integer, skipping whitespace and '#' comments.
inline int pgm_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    throw FormatError(std::string("PGM: malformed header, expected ") + field);
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000) throw FormatError(std::string("PGM: ") + field + " out of range");
    ++pos;
  }
  return static_cast<int>(value);
}

}  // namespace detail

/// Decodes a P5 PGM. maxval <= 255 uses one byte per sample, larger maxval two
/// bytes, most significant first.
inline Frame decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw FormatError("PGM: missing magic number");
  if (bytes[1] != '5') {
    throw FormatError(std::string("PGM: unsupported variant P") + static_cast<char>(bytes[1]) + " (only binary P5 is supported)");
  }
  std::size_t pos = 2;
  const int width = detail::pgm_header_int(bytes, pos, "width");
  const int height = detail::pgm_header_int(bytes, pos, "height");
  const int maxval = detail::pgm_header_int(bytes, pos, "maxval");
  if (width <= 0 || height <= 0) throw FormatError("PGM: non-positive dimensions");
  if (maxval < 1 || maxval > 65535) throw FormatError("PGM: maxval must be in [1, 65535]");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("PGM: malformed header, missing separator before data");
  ++pos;

  Frame f(width, height, maxval);
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t need = f.size() * bps;
  if (bytes.size() - pos < need) {
    throw FormatError("PGM: truncated payload, expected " + std::to_string(need) + " bytes, got " +
                      std::to_string(bytes.size() - pos));
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint16_t v = bps == 1 ? bytes[pos + i]
                                     : static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    if (v > maxval) throw FormatError("PGM: sample exceeds maxval");
    f.pixels[i] = v;
  }
  return f;
}

inline std::vector<std::uint8_t> encode_pgm(const Frame& f) {
  if (f.max_value < 1 || f.max_value > 65535) throw std::invalid_argument("encode_pgm: max_value out of range");
  const std::string header = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n" +
                             std::to_string(f.max_value) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const bool wide = f.max_value > 255;
  out.reserve(out.size() + f.size() * (wide ? 2 : 1));
  for (std::uint16_t v : f.pixels) {
    if (wide) {
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v & 0xff));
    } else {
      out.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return out;
}

inline Frame read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_pgm(const Frame& f, const std::filesystem::path& path) { detail::write_file(path, encode_pgm(f)); }

/// Mask as an 8-bit frame: foreground 255, background 0, ignore 128.
inline Frame mask_to_frame(const MaskFrame& mask) {
  Frame f(mask.width, mask.height, 255);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    switch (mask.labels[i]) {
      case Label::foreground: f.pixels[i] = 255; break;
      case Label::ignore: f.pixels[i] = 128; break;
      case Label::background: f.pixels[i] = 0; break;
    }
  }
  return f;
}

/// 0 is background, 128 is ignore (non-ROI), any other value is foreground.
inline MaskFrame frame_to_mask(const Frame& f) {
  MaskFrame m(f.width, f.height);
  const int ignore = f.max_value > 255 ? -1 : 128;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int v = f.pixels[i];
    m.labels[i] = v == 0 ? Label::background : v == ignore ? Label::ignore : Label::foreground;
  }
  return m;
}

inline void write_mask(const MaskFrame& mask, const std::filesystem::path& path) { write_pgm(mask_to_frame(mask), path); }

inline MaskFrame read_mask(const std::filesystem::path& path) { return frame_to_mask(read_pgm(path)); }

/// 16-bit PGM of round(p(bg | x) * 65535).
inline Frame posterior_to_frame(const MaskFrame& mask) {
  if (mask.posterior.size() != mask.size()) throw std::invalid_argument("posterior_to_frame: mask has no posterior");
  Frame f(mask.width, mask.height, 65535);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    f.pixels[i] = static_cast<std::uint16_t>(std::lround(std::clamp(mask.posterior[i], 0.0, 1.0) * 65535.0));
  }
  return f;
}

inline void write_posterior(const MaskFrame& mask, const std::filesystem::path& path) {
  write_pgm(posterior_to_frame(mask), path);
}

/// Splits a headerless byte stream into frames of width x height samples of
/// 8 or 16 bits.
inline FrameSequence decode_raw_sequence(std::span<const std::uint8_t> bytes, int width, int height, int depth,
                                         Endianness endian = Endianness::little) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("raw: non-positive dimensions");
  if (depth != 8 && depth != 16) throw std::invalid_argument("raw: depth must be 8 or 16");
  const std::size_t bps = depth / 8;
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * bps;
  if (bytes.size() % frame_bytes != 0) {
    const std::size_t frames = bytes.size() / frame_bytes;
    throw FormatError("raw: length " + std::to_string(bytes.size()) + " bytes is not a whole number of " +
                      std::to_string(frame_bytes) + "-byte frames (expected " + std::to_string(frames * frame_bytes) +
                      " or " + std::to_string((frames + 1) * frame_bytes) + ")");
  }
  FrameSequence seq;
  const int maxval = depth == 8 ? 255 : 65535;
  for (std::size_t off = 0; off < bytes.size(); off += frame_bytes) {
    Frame f(width, height, maxval);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (bps == 1) {
        f.pixels[i] = bytes[off + i];
      } else {
        const std::uint8_t lo = bytes[off + 2 * i + (endian == Endianness::little ? 0 : 1)];
        const std::uint8_t hi = bytes[off + 2 * i + (endian == Endianness::little ? 1 : 0)];
        f.pixels[i] = static_cast<std::uint16_t>((hi << 8) | lo);
      }
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

inline FrameSequence read_raw_sequence(const std::filesystem::path& path, int width, int height, int depth,
                                       Endianness endian = Endianness::little) {
  try {
    return decode_raw_sequence(detail::read_file(path), width, height, depth, endian);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// All *.pgm files of a directory in filename order; names hold the stems.
inline FrameSequence read_pgm_directory(const std::filesystem::path& dir, std::size_t limit = 0) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (limit > 0 && files.size() > limit) files.resize(limit);
  FrameSequence seq;
  for (const auto& p : files) {
    seq.frames.push_back(read_pgm(p));
    seq.names.push_back(p.stem().string());
  }
  seq.check_uniform();
  return seq;
}

}  // namespace thermobg
