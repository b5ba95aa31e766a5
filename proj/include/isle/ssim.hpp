#pragma once

// Single-scale structural similarity with a Gaussian window.

#include <cmath>
#include <vector>

#include "isle/canny.hpp"
#include "isle/image.hpp"

namespace isle {

struct SsimParams {
  int window = 11;  // odd
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  void validate() const {
    if (window < 3 || window % 2 == 0) throw ContractError("ssim window must be odd and >= 3");
    if (!(sigma > 0.0) || !(k1 > 0.0) || !(k2 > 0.0) || !(dynamic_range > 0.0)) {
      throw ContractError("ssim sigma, k1, k2 and dynamic_range must be positive");
    }
  }
};

namespace detail {

// Separable normalized Gaussian filter, replicated borders (constants are
// preserved exactly in the mean maps up to rounding).
inline Field window_filter(const Field& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int w = in.width();
  const int h = in.height();
  Field tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in(clamp_index(x + i, w), y);
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

inline std::vector<double> ssim_window(const SsimParams& p) {
  const int r = p.window / 2;
  std::vector<double> k(p.window);
  double total = 0.0;
  for (int i = -r; i <= r; ++i) total += k[i + r] = std::exp(-(i * i) / (2.0 * p.sigma * p.sigma));
  for (double& v : k) v /= total;
  return k;
}

}  // namespace detail

/// Per-pixel SSIM map.
inline Field ssim_map(const ImageGray& a, const ImageGray& b, const SsimParams& p = {}) {
  require_same_shape(a, b, "ssim");
  p.validate();
  const auto k = detail::ssim_window(p);
  const int w = a.width();
  const int h = a.height();

  Field aa(w, h), bb(w, h), ab(w, h);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    aa.data()[i] = a.data()[i] * a.data()[i];
    bb.data()[i] = b.data()[i] * b.data()[i];
    ab.data()[i] = a.data()[i] * b.data()[i];
  }
  const Field mu_a = detail::window_filter(a, k);
  const Field mu_b = detail::window_filter(b, k);
  const Field e_aa = detail::window_filter(aa, k);
  const Field e_bb = detail::window_filter(bb, k);
  const Field e_ab = detail::window_filter(ab, k);

  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  Field out(w, h);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    const double ma = mu_a.data()[i];
    const double mb = mu_b.data()[i];
    const double va = e_aa.data()[i] - ma * ma;
    const double vb = e_bb.data()[i] - mb * mb;
    const double cov = e_ab.data()[i] - ma * mb;
    out.data()[i] = ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return out;
}

/// Mean SSIM over all pixels.
inline double ssim(const ImageGray& a, const ImageGray& b, const SsimParams& p = {}) {
  const Field m = ssim_map(a, b, p);
  double total = 0.0;
  for (double v : m.data()) total += v;
  return total / static_cast<double>(m.pixel_count());
}

/// Edge map as a {0,1}-valued gray image.
template <typename Tag>
ImageGray to_unit_image(const BitMap<Tag>& map) {
  ImageGray out(map.width(), map.height());
  for (std::size_t i = 0; i < map.pixel_count(); ++i) out.data()[i] = map.bits()[i] ? 1.0 : 0.0;
  return out;
}

}  // namespace isle
