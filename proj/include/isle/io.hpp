#pragma once

// PNG / binary PPM+PGM reading and PNG writing. Values are 8-bit on disk and
// real-valued in [0,1] in memory (v = byte / 255).

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "isle/image.hpp"

namespace isle {

/// Decoded 8-bit raster, 1 (gray) or 3 (RGB) interleaved channels.
struct Raster8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

namespace detail {

[[noreturn]] inline void io_fail(const std::filesystem::path& path, const std::string& why) {
  throw IoError(path.string() + ": " + why);
}

struct PngImageGuard {
  png_image* img;
  ~PngImageGuard() { png_image_free(img); }
};

inline Raster8 read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&img};
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    io_fail(path, std::string("PNG decode failed: ") + img.message);
  }
  if (img.width == 0 || img.height == 0) io_fail(path, "zero-dimension image");
  if (img.format & PNG_FORMAT_FLAG_LINEAR) io_fail(path, "16-bit PNG is not supported");

  // Palette files are expanded to RGB; gray stays gray so label values survive untouched.
  const bool gray = (img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP)) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  Raster8 out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.channels = gray ? 1 : 3;
  out.bytes.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.bytes.data(), 0, nullptr)) {
    io_fail(path, std::string("PNG decode failed: ") + img.message);
  }
  return out;
}

// Netpbm header token reader; skips whitespace and '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

inline Raster8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open file");
  const std::string magic = pnm_token(in);
  const int channels = magic == "P6" ? 3 : magic == "P5" ? 1 : 0;
  if (channels == 0) io_fail(path, "unsupported netpbm variant '" + magic + "'");

  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    io_fail(path, "malformed netpbm header");
  }
  if (w <= 0 || h <= 0) io_fail(path, "zero-dimension image");
  if (maxval != 255) io_fail(path, "only 8-bit netpbm (maxval 255) is supported");

  Raster8 out{w, h, channels, {}};
  out.bytes.resize(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(out.bytes.data()), static_cast<std::streamsize>(out.bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(out.bytes.size())) io_fail(path, "truncated pixel data");
  return out;
}

inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline void write_png(const std::filesystem::path& path, int width, int height, int channels,
                      const std::uint8_t* bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  PngImageGuard guard{&img};
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes, 0, nullptr)) {
    io_fail(path, std::string("PNG write failed: ") + img.message);
  }
}

}  // namespace detail

/// Decode a PNG or binary PPM/PGM file into 8-bit samples.
inline Raster8 read_raster8(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) detail::io_fail(path, "cannot open file");
  std::array<unsigned char, 8> sig{};
  probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
  const auto got = static_cast<std::size_t>(probe.gcount());
  probe.close();

  if (got == sig.size() && png_sig_cmp(sig.data(), 0, sig.size()) == 0) return detail::read_png(path);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return detail::read_pnm(path);
  detail::io_fail(path, "unsupported image format (expected PNG, PPM or PGM)");
}

/// Load an image as RGB in [0,1]; gray files are replicated across channels.
inline ImageRGB load_image(const std::filesystem::path& path) {
  const Raster8 r = read_raster8(path);
  ImageRGB img(r.width, r.height);
  auto out = img.data();
  const std::size_t n = img.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      const std::uint8_t b = r.channels == 1 ? r.bytes[p] : r.bytes[p * 3 + c];
      out[p * 3 + c] = b / 255.0;
    }
  }
  return img;
}

/// Load a binary raster (edge map, building mask). A pixel is set when its
/// Rec. 601 luma is at least half scale.
template <typename Tag>
BitMap<Tag> load_bitmap(const std::filesystem::path& path) {
  const Raster8 r = read_raster8(path);
  BitMap<Tag> out(r.width, r.height);
  auto bits = out.bits();
  for (std::size_t p = 0; p < bits.size(); ++p) {
    double v = 0.0;
    if (r.channels == 1) {
      v = r.bytes[p];
    } else {
      v = 0.299 * r.bytes[p * 3] + 0.587 * r.bytes[p * 3 + 1] + 0.114 * r.bytes[p * 3 + 2];
    }
    bits[p] = v >= 127.5 ? 1 : 0;
  }
  return out;
}

inline EdgeMap load_edge_map(const std::filesystem::path& path) { return load_bitmap<EdgeTag>(path); }
inline BinaryMask load_mask(const std::filesystem::path& path) { return load_bitmap<BuildingTag>(path); }

/// Write an RGB image as an 8-bit RGB PNG, quantizing by round(v * 255).
inline void save_image(const ImageRGB& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(img.data().size());
  std::transform(img.data().begin(), img.data().end(), bytes.begin(), detail::quantize);
  detail::write_png(path, img.width(), img.height(), 3, bytes.data());
}

inline void save_image(const ImageGray& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(img.data().size());
  std::transform(img.data().begin(), img.data().end(), bytes.begin(), detail::quantize);
  detail::write_png(path, img.width(), img.height(), 1, bytes.data());
}

/// Binary rasters are written as single-channel PNG, 0 = clear, 255 = set.
template <typename Tag>
void save_image(const BitMap<Tag>& map, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(map.pixel_count());
  std::transform(map.bits().begin(), map.bits().end(), bytes.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  detail::write_png(path, map.width(), map.height(), 1, bytes.data());
}

}  // namespace isle
