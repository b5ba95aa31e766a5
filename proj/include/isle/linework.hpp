#pragma once

// Straight-line extraction on edge maps and line-targeted sharpening.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>
#include <vector>

#include "isle/image.hpp"

namespace isle {

/// Line in normal form: x cos(theta) + y sin(theta) = rho, with x the column
/// and y the row of a pixel centre.
struct Line {
  double rho = 0.0;
  double theta = 0.0;  // [0, pi)
  int votes = 0;

  friend bool operator==(const Line&, const Line&) = default;
};

struct HoughParams {
  double rho_res = 1.0;
  double theta_res = std::numbers::pi / 180.0;
  double vote_frac = 0.25;  // of max(width, height)
  int nms_rho = 9;          // peak suppression window, in bins
  int nms_theta = 9;

  void validate() const {
    if (!(rho_res > 0.0) || !(theta_res > 0.0)) throw ContractError("hough resolutions must be positive");
    if (!(vote_frac > 0.0 && vote_frac <= 1.0)) throw ContractError("hough vote_frac must be in (0, 1]");
    if (nms_rho < 1 || nms_theta < 1 || nms_rho % 2 == 0 || nms_theta % 2 == 0) {
      throw ContractError("hough nms window must be odd and positive");
    }
  }
};

/// Default distance (pixels) within which edge pixels count as on a line.
inline constexpr double kLineTolerance = 1.5;

/// Accumulator peaks of the (rho, theta) transform of the edge pixels,
/// optionally restricted to pixels inside `region`. Sorted by votes
/// descending, then theta and rho ascending.
template <typename RegionTag = BuildingTag>
std::vector<Line> hough_lines(const EdgeMap& edges, const HoughParams& params,
                              const BitMap<RegionTag>* region = nullptr) {
  params.validate();
  if (region != nullptr) require_same_shape(edges, *region, "hough_lines");

  const int w = edges.width();
  const int h = edges.height();
  const double diag = std::hypot(static_cast<double>(w - 1), static_cast<double>(h - 1));
  const int n_theta = std::max(1, static_cast<int>(std::lround(std::numbers::pi / params.theta_res)));
  const int rho_half = static_cast<int>(std::ceil(diag / params.rho_res));
  const int n_rho = 2 * rho_half + 1;

  std::vector<double> cos_t(n_theta), sin_t(n_theta);
  for (int t = 0; t < n_theta; ++t) {
    const double theta = t * params.theta_res;
    cos_t[t] = std::cos(theta);
    sin_t[t] = std::sin(theta);
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!edges(x, y) || (region != nullptr && !(*region)(x, y))) continue;
      for (int t = 0; t < n_theta; ++t) {
        const double rho = x * cos_t[t] + y * sin_t[t];
        const int r = static_cast<int>(std::lround(rho / params.rho_res)) + rho_half;
        ++acc[static_cast<std::size_t>(t) * n_rho + r];
      }
    }
  }

  const double min_votes = params.vote_frac * std::max(w, h);
  const int ht = params.nms_theta / 2;
  const int hr = params.nms_rho / 2;
  // Strict total order on bins: more votes wins, then smaller (theta, rho).
  auto beats = [&](int t0, int r0, int t1, int r1) {
    const int v0 = acc[static_cast<std::size_t>(t0) * n_rho + r0];
    const int v1 = acc[static_cast<std::size_t>(t1) * n_rho + r1];
    if (v0 != v1) return v0 > v1;
    return std::tie(t0, r0) < std::tie(t1, r1);
  };

  std::vector<Line> lines;
  for (int t = 0; t < n_theta; ++t) {
    for (int r = 0; r < n_rho; ++r) {
      const int votes = acc[static_cast<std::size_t>(t) * n_rho + r];
      if (votes == 0 || votes < min_votes) continue;
      bool peak = true;
      for (int dt = -ht; dt <= ht && peak; ++dt) {
        // theta wraps at pi with rho mirrored.
        int tn = t + dt;
        bool mirror = false;
        if (tn < 0) {
          tn += n_theta;
          mirror = true;
        } else if (tn >= n_theta) {
          tn -= n_theta;
          mirror = true;
        }
        for (int dr = -hr; dr <= hr; ++dr) {
          if (dt == 0 && dr == 0) continue;
          int rn = r + dr;
          if (mirror) rn = 2 * rho_half - rn;
          if (rn < 0 || rn >= n_rho) continue;
          if (tn == t && rn == r) continue;
          if (beats(tn, rn, t, r)) {
            peak = false;
            break;
          }
        }
      }
      if (peak) lines.push_back({(r - rho_half) * params.rho_res, t * params.theta_res, votes});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    return std::tie(a.theta, a.rho) < std::tie(b.theta, b.rho);
  });
  return lines;
}

inline std::vector<Line> hough_lines(const EdgeMap& edges, const HoughParams& params,
                                     const std::optional<BinaryMask>& region) {
  return hough_lines(edges, params, region ? &*region : nullptr);
}

/// Edge pixels lying within `tol` pixels of at least one line.
inline PixelMask mark_line_pixels(const EdgeMap& edges, const std::vector<Line>& lines,
                                  double tol = kLineTolerance) {
  PixelMask marked(edges.width(), edges.height());
  if (lines.empty()) return marked;
  for (int y = 0; y < edges.height(); ++y) {
    for (int x = 0; x < edges.width(); ++x) {
      if (!edges(x, y)) continue;
      for (const auto& line : lines) {
        if (std::abs(x * std::cos(line.theta) + y * std::sin(line.theta) - line.rho) <= tol) {
          marked.set(x, y);
          break;
        }
      }
    }
  }
  return marked;
}

/// 3x3 sharpening (centre 9, neighbours -1) evaluated only at marked pixels.
/// Reads the unmodified input with replicated borders; writes are clamped to
/// [0,1]; unmarked pixels are copied verbatim.
template <int C>
Image<double, C> sharpen_at(const Image<double, C>& img, const PixelMask& mask) {
  require_same_shape(img, mask, "sharpen_at");
  const int w = img.width();
  const int h = img.height();
  Image<double, C> out = img;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      for (int c = 0; c < C; ++c) {
        // Pairwise sum: eight equal neighbours add up to exactly 8 * centre,
        // so flat neighbourhoods pass through bit-for-bit.
        const double ring = ((img(xm, ym, c) + img(x, ym, c)) + (img(xp, ym, c) + img(xm, y, c))) +
                            ((img(xp, y, c) + img(xm, yp, c)) + (img(x, yp, c) + img(xp, yp, c)));
        const double centre = img(x, y, c);
        out(x, y, c) = std::clamp(centre + (8.0 * centre - ring), 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace isle
