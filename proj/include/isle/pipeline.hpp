#pragma once

// Iterative smoothing / line enhancing driver.
//
// One iteration = L0 smoothing at the next weight of an ascending schedule,
// Canny on the result, Hough lines on that edge map (inside the building
// region when one is given), and 3x3 sharpening of the edge pixels lying on
// those lines. The final Canny map of the last sharpened image is the raw
// outline; AND-ing it with the dilated building mask gives the refined one.

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isle/canny.hpp"
#include "isle/color.hpp"
#include "isle/image.hpp"
#include "isle/l0smooth.hpp"
#include "isle/linework.hpp"
#include "isle/maskops.hpp"

namespace isle {

enum class Mode { low, medium, high };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::low: return "low";
    case Mode::medium: return "medium";
    case Mode::high: return "high";
  }
  return "?";
}

/// Per-illumination settings.
struct ModeConfig {
  Mode mode = Mode::high;
  CannyParams canny;
  int max_iter = 1;
  double brightness_factor = 1.0;

  friend bool operator==(const ModeConfig& a, const ModeConfig& b) {
    return a.mode == b.mode && a.canny.low == b.canny.low && a.canny.high == b.canny.high &&
           a.canny.sigma == b.canny.sigma && a.max_iter == b.max_iter &&
           a.brightness_factor == b.brightness_factor;
  }
};

struct PipelineConfig {
  int t_high = 120;  // on the 0-255 intensity median
  int t_low = 90;
  std::vector<double> lambda_seq;
  std::array<ModeConfig, 3> modes;  // indexed by Mode
  HoughParams hough;
  SmoothParams solver;  // lambda is taken from lambda_seq
  double line_tol = kLineTolerance;
  int mask_dilation_radius = 5;

  [[nodiscard]] const ModeConfig& mode(Mode m) const { return modes[static_cast<std::size_t>(m)]; }
  [[nodiscard]] ModeConfig& mode(Mode m) { return modes[static_cast<std::size_t>(m)]; }

  /// Throws ConfigError on an inconsistent configuration; returns
  /// non-fatal warnings.
  [[nodiscard]] std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (t_low < 0 || t_high > 255 || !(t_low < t_high)) fail("t_low/t_high must satisfy 0 <= t_low < t_high <= 255");
    if (lambda_seq.empty()) fail("lambda_seq must not be empty");
    for (std::size_t i = 0; i < lambda_seq.size(); ++i) {
      if (!(lambda_seq[i] > 0.0)) fail("lambda_seq[" + std::to_string(i) + "] must be positive");
      if (i > 0 && !(lambda_seq[i] > lambda_seq[i - 1])) {
        fail("lambda_seq must be strictly ascending (entry " + std::to_string(i) + ")");
      }
      if (!lambda_in_recommended_range(lambda_seq[i])) {
        warnings.push_back("lambda_seq[" + std::to_string(i) + "] = " + std::to_string(lambda_seq[i]) +
                           " lies outside the usual range [0.001, 0.1]");
      }
    }
    for (const auto& m : modes) {
      const std::string name(mode_name(m.mode));
      try {
        m.canny.validate();
      } catch (const ContractError& e) {
        fail(name + ": " + e.what());
      }
      if (m.max_iter < 1) fail(name + ".max_iter must be >= 1");
      if (static_cast<std::size_t>(m.max_iter) > lambda_seq.size()) {
        fail(name + ".max_iter (" + std::to_string(m.max_iter) + ") exceeds lambda_seq length (" +
             std::to_string(lambda_seq.size()) + ")");
      }
      if (!(m.brightness_factor >= 1.0)) fail(name + ".brightness_factor must be >= 1");
    }
    try {
      hough.validate();
      SmoothParams probe = solver;
      probe.lambda = lambda_seq.back();
      probe.validate();
    } catch (const ContractError& e) {
      fail(e.what());
    }
    if (!(line_tol > 0.0)) fail("line_tol must be positive");
    if (mask_dilation_radius < 1) fail("mask_dilation_radius must be >= 1");
    return warnings;
  }
};

/// Settings used for the published building-outline experiments.
inline PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.t_high = 120;
  cfg.t_low = 90;
  cfg.lambda_seq = {0.001, 0.003, 0.005, 0.008, 0.01, 0.02, 0.03};
  cfg.mode(Mode::high) = {Mode::high, {0.05, 0.45, 1.4}, 7, 1.0};
  cfg.mode(Mode::medium) = {Mode::medium, {0.05, 0.35, 1.4}, 5, 1.3};
  cfg.mode(Mode::low) = {Mode::low, {0.05, 0.30, 1.4}, 3, 1.5};
  return cfg;
}

/// Illumination mode for an intensity median: above t_high is high, below
/// t_low is low, anything in between (boundaries included) is medium.
inline const ModeConfig& select_mode(int median, const PipelineConfig& cfg) {
  if (median > cfg.t_high) return cfg.mode(Mode::high);
  if (median < cfg.t_low) return cfg.mode(Mode::low);
  return cfg.mode(Mode::medium);
}

struct IterationRecord {
  int index = 0;  // 1-based
  double lambda = 0.0;
  std::size_t line_count = 0;
  std::uint64_t smoothed_checksum = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct IsleOutput {
  EdgeMap raw_edges;
  EdgeMap refined_edges;
  Mode mode = Mode::high;
  int median = 0;
  std::vector<IterationRecord> iterations;
};

/// Intermediate products of one iteration, handed to an observer.
struct IterationView {
  const IterationRecord& record;
  const ImageRGB& smoothed;
  const EdgeMap& edges;
  const std::vector<Line>& lines;
  const PixelMask& marked;
  const ImageRGB& sharpened;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// FNV-1a over the bit patterns of the samples.
template <typename T, int C>
std::uint64_t checksum(const Image<T, C>& img) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const T v : img.data()) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (unsigned char b : bytes) {
      hash ^= b;
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

/// Run the full outline extraction. `mask` is the undilated building mask;
/// it is dilated by cfg.mask_dilation_radius before use.
inline IsleOutput isle_run(const ImageRGB& img, const std::optional<BinaryMask>& mask,
                           const PipelineConfig& cfg, const IterationObserver& observer = {}) {
  (void)cfg.validate();
  std::optional<BinaryMask> region;
  if (mask) {
    require_same_shape(img, *mask, "isle_run mask");
    region = dilate(*mask, cfg.mask_dilation_radius);
  }

  IsleOutput out;
  out.median = intensity_median(to_luma(img));
  const ModeConfig& mode = select_mode(out.median, cfg);
  out.mode = mode.mode;

  ImageRGB working = scale_brightness(img, mode.brightness_factor);
  for (int k = 0; k < mode.max_iter; ++k) {
    SmoothParams sp = cfg.solver;
    sp.lambda = cfg.lambda_seq[static_cast<std::size_t>(k)];
    const ImageRGB smoothed = l0_smooth(working, sp);
    const EdgeMap edges = canny(to_luma(smoothed), mode.canny);
    const std::vector<Line> lines = hough_lines(edges, cfg.hough, region);
    const PixelMask marked = mark_line_pixels(edges, lines, cfg.line_tol);
    working = sharpen_at(smoothed, marked);

    out.iterations.push_back({k + 1, sp.lambda, lines.size(), checksum(smoothed)});
    if (observer) observer({out.iterations.back(), smoothed, edges, lines, marked, working});
  }

  out.raw_edges = canny(to_luma(working), mode.canny);
  out.refined_edges = region ? apply_mask(out.raw_edges, *region) : out.raw_edges;
  return out;
}

inline IsleOutput isle_run(const ImageRGB& img, const PipelineConfig& cfg) {
  return isle_run(img, std::nullopt, cfg);
}

}  // namespace isle
