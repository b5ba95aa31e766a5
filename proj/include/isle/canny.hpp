#pragma once

// Canny edge extraction with thresholds expressed on the unit interval:
// gradient magnitudes are divided by the image's maximum magnitude before
// hysteresis, so (low, high) = (0.05, 0.3) means 5% / 30% of the strongest
// gradient in the image.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "isle/image.hpp"

namespace isle {

struct CannyParams {
  double low = 0.05;
  double high = 0.3;
  double sigma = 1.4;

  void validate() const {
    if (!(low >= 0.0 && low < high && high <= 1.0)) {
      throw ContractError("canny thresholds must satisfy 0 <= low < high <= 1");
    }
    if (!(sigma > 0.0)) throw ContractError("canny sigma must be positive");
  }
};

struct GradientField {
  Field magnitude;
  Field direction;  // atan2(gy, gx), radians, y axis pointing down
};

/// Maxima below this are treated as a gradient-free image.
inline constexpr double kFlatGradient = 1e-9;

namespace detail {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

/// Gaussian radius for a given sigma; 2 (a 5x5 kernel) at the default 1.4.
inline int gaussian_radius(double sigma) {
  return std::max(1, static_cast<int>(std::lround(1.5 * sigma)));
}

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = gaussian_radius(sigma);
  std::vector<double> k(2 * r + 1);
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += k[i + r];
  }
  for (double& v : k) v /= total;
  return k;
}

/// Separable Gaussian blur with replicated borders.
inline Field gaussian_blur(const ImageGray& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = img.width();
  const int h = img.height();
  Field tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img(clamp_index(x + i, w), y);
      tmp(x, y) = acc;
    }
  }
  Field out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, clamp_index(y + i, h));
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Sobel response of the Gaussian-blurred image (replicated borders).
inline GradientField gradient_field(const ImageGray& img, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("gradient_field: sigma must be positive");
  const Field blurred = detail::gaussian_blur(img, sigma);
  const int w = img.width();
  const int h = img.height();
  GradientField g{Field(w, h), Field(w, h)};
  for (int y = 0; y < h; ++y) {
    const int ym = detail::clamp_index(y - 1, h);
    const int yp = detail::clamp_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = detail::clamp_index(x - 1, w);
      const int xp = detail::clamp_index(x + 1, w);
      const double gx = (blurred(xp, ym) + 2.0 * blurred(xp, y) + blurred(xp, yp)) -
                        (blurred(xm, ym) + 2.0 * blurred(xm, y) + blurred(xm, yp));
      const double gy = (blurred(xm, yp) + 2.0 * blurred(x, yp) + blurred(xp, yp)) -
                        (blurred(xm, ym) + 2.0 * blurred(x, ym) + blurred(xp, ym));
      g.magnitude(x, y) = std::hypot(gx, gy);
      g.direction(x, y) = std::atan2(gy, gx);
    }
  }
  return g;
}

namespace detail {

// Neighbour offset along the gradient for one of 4 quantized directions.
inline void nms_offset(double angle, int& dx, int& dy) {
  double deg = angle * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  if (deg < 22.5 || deg >= 157.5) {
    dx = 1, dy = 0;
  } else if (deg < 67.5) {
    dx = 1, dy = 1;
  } else if (deg < 112.5) {
    dx = 0, dy = 1;
  } else {
    dx = -1, dy = 1;
  }
}

}  // namespace detail

/// Normalized-magnitude pixels that survive non-maximum suppression.
/// Ties between equal neighbours keep the one earlier in row-major order.
inline Field suppress_non_maxima(const GradientField& g, double max_magnitude) {
  const int w = g.magnitude.width();
  const int h = g.magnitude.height();
  Field out(w, h, 0.0);
  auto mag = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : g.magnitude(x, y);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = g.magnitude(x, y);
      if (m <= 0.0) continue;
      int dx = 0, dy = 0;
      detail::nms_offset(g.direction(x, y), dx, dy);
      // (x+dx, y+dy) is always later in raster order than (x-dx, y-dy).
      const double later = mag(x + dx, y + dy);
      const double earlier = mag(x - dx, y - dy);
      if (m > earlier && m >= later) out(x, y) = m / max_magnitude;
    }
  }
  return out;
}

/// Canny edge map of a gray image.
inline EdgeMap canny(const ImageGray& img, const CannyParams& params) {
  params.validate();
  const int w = img.width();
  const int h = img.height();
  EdgeMap edges(w, h);

  const GradientField g = gradient_field(img, params.sigma);
  const double max_mag = *std::max_element(g.magnitude.data().begin(), g.magnitude.data().end());
  if (max_mag <= kFlatGradient) return edges;

  const Field thin = suppress_non_maxima(g, max_mag);

  std::vector<int> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (thin(x, y) >= params.high && !edges(x, y)) {
        edges.set(x, y);
        stack.push_back(y * w + x);
      }
    }
  }
  while (!stack.empty()) {
    const int p = stack.back();
    stack.pop_back();
    const int px = p % w;
    const int py = p / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = px + dx;
        const int ny = py + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h || edges(nx, ny)) continue;
        if (thin(nx, ny) >= params.low && thin(nx, ny) > 0.0) {
          edges.set(nx, ny);
          stack.push_back(ny * w + nx);
        }
      }
    }
  }
  return edges;
}

}  // namespace isle
