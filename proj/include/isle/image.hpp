#pragma once

// Raster containers shared by every stage of the outline pipeline.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isle {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read, decoded, or written.
struct IoError : Error {
  using Error::Error;
};

/// Caller broke a precondition (shape mismatch, out-of-range argument).
struct ContractError : Error {
  using Error::Error;
};

/// Configuration file or parameter set is malformed or inconsistent.
struct ConfigError : Error {
  using Error::Error;
};

/// Dense interleaved row-major raster with a compile-time channel count.
template <typename T, int Channels>
class Image {
  static_assert(Channels >= 1);

 public:
  using value_type = T;
  static constexpr int channels = Channels;

  Image() = default;

  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ContractError("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  T& operator()(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  [[nodiscard]] std::span<T> data() noexcept { return data_; }
  [[nodiscard]] std::span<const T> data() const noexcept { return data_; }

  template <typename U, int C>
  [[nodiscard]] bool same_shape(const Image<U, C>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageRGB = Image<double, 3>;
using ImageGray = Image<double, 1>;
/// Unbounded single-channel real field (gradient magnitudes, angles).
using Field = Image<double, 1>;

/// Boolean raster aligned to an image. The tag keeps edge maps, building
/// masks and line masks from being mixed up at call sites.
template <typename Tag>
class BitMap {
 public:
  BitMap() = default;

  BitMap(int width, int height, bool fill = false) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ContractError("mask dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t pixel_count() const noexcept { return bits_.size(); }

  [[nodiscard]] bool operator()(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value = true) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }

  [[nodiscard]] std::span<std::uint8_t> bits() noexcept { return bits_; }
  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  template <typename Other>
  [[nodiscard]] bool same_shape(const Other& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  /// True when every set bit of *this is also set in `other`.
  template <typename OtherTag>
  [[nodiscard]] bool subset_of(const BitMap<OtherTag>& other) const noexcept {
    if (!same_shape(other)) return false;
    auto ob = other.bits();
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] && !ob[i]) return false;
    }
    return true;
  }

  friend bool operator==(const BitMap&, const BitMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct EdgeTag {};
struct BuildingTag {};
struct LineTag {};

using EdgeMap = BitMap<EdgeTag>;
using BinaryMask = BitMap<BuildingTag>;
using PixelMask = BitMap<LineTag>;

/// Reinterpret the bits of one mask kind as another (same geometry).
template <typename To, typename From>
[[nodiscard]] BitMap<To> retag(const BitMap<From>& src) {
  BitMap<To> out(src.width(), src.height());
  std::copy(src.bits().begin(), src.bits().end(), out.bits().begin());
  return out;
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ContractError(std::string(what) + ": dimension mismatch " + std::to_string(a.width()) +
                        "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                        "x" + std::to_string(b.height()));
  }
}

}  // namespace isle
