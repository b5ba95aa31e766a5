#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isle/image.hpp"

namespace isle {

/// Rec. 601 luma, clamped to [0,1].
inline ImageGray to_luma(const ImageRGB& img) {
  ImageGray out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    const double y = 0.299 * src[3 * p] + 0.587 * src[3 * p + 1] + 0.114 * src[3 * p + 2];
    dst[p] = std::clamp(y, 0.0, 1.0);
  }
  return out;
}

/// Lower median of the 8-bit intensity histogram (index floor((n-1)/2) of the
/// sorted quantized values).
inline int intensity_median(const ImageGray& img) {
  std::vector<std::size_t> hist(256, 0);
  for (double v : img.data()) {
    ++hist[static_cast<std::size_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))];
  }
  const std::size_t rank = (img.pixel_count() - 1) / 2;
  std::size_t seen = 0;
  for (int level = 0; level < 256; ++level) {
    seen += hist[static_cast<std::size_t>(level)];
    if (seen > rank) return level;
  }
  return 255;
}

/// Multiply every channel by `factor`, saturating at 1.
inline ImageRGB scale_brightness(const ImageRGB& img, double factor) {
  if (!(factor > 0.0)) throw ContractError("brightness factor must be positive");
  ImageRGB out = img;
  for (double& v : out.data()) v = std::min(1.0, v * factor);
  return out;
}

}  // namespace isle
