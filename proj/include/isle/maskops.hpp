#pragma once

// Building masks from semantic label maps (ADE20K 150-class indexing).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isle/image.hpp"
#include "isle/io.hpp"

namespace isle {

inline constexpr int kLabelCount = 150;

/// Per-pixel semantic class ids in [0, 149].
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::uint8_t fill = 0) : ids_(width, height, fill) {}

  [[nodiscard]] int width() const noexcept { return ids_.width(); }
  [[nodiscard]] int height() const noexcept { return ids_.height(); }
  [[nodiscard]] int operator()(int x, int y) const noexcept { return ids_(x, y); }
  void set(int x, int y, int id) {
    if (id < 0 || id >= kLabelCount) throw ContractError("label id out of range: " + std::to_string(id));
    ids_(x, y) = static_cast<std::uint8_t>(id);
  }
  [[nodiscard]] std::span<const std::uint8_t> ids() const noexcept { return ids_.data(); }

  template <typename Other>
  [[nodiscard]] bool same_shape(const Other& o) const noexcept {
    return width() == o.width() && height() == o.height();
  }

 private:
  Image<std::uint8_t, 1> ids_;
};

/// Class-name to id table, e.g. {"building": 1, "door": 14, ...}.
using ClassMap = std::map<std::string, int>;

/// Names of the classes that make up a building mask.
inline const std::vector<std::string>& building_class_names() {
  static const std::vector<std::string> names = {"door",  "building", "house",
                                                 "wall",  "awning",   "windowpane"};
  return names;
}

/// 0-based ids of the building classes in the ADE20K scene-parsing release.
inline ClassMap default_class_map() {
  return {{"wall", 0}, {"building", 1}, {"windowpane", 8}, {"door", 14}, {"house", 25}, {"awning", 86}};
}

/// Parse `name=id` lines; blank lines and '#' comments are ignored.
inline ClassMap parse_class_map(std::istream& in, const std::string& origin = "<class map>") {
  ClassMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    const auto where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected name=id");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    int id = -1;
    std::istringstream vs(value);
    if (name.empty() || !(vs >> id) || !vs.eof() || id < 0 || id >= kLabelCount) {
      throw ConfigError(where + ": invalid class entry '" + trim(line) + "'");
    }
    out[name] = id;
  }
  return out;
}

inline ClassMap load_class_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open class map");
  return parse_class_map(in, path.string());
}

/// Ids of the building classes; every building class name must be present.
inline std::set<int> building_ids(const ClassMap& classes) {
  std::set<int> ids;
  for (const auto& name : building_class_names()) {
    const auto it = classes.find(name);
    if (it == classes.end()) throw ConfigError("class map has no entry for '" + name + "'");
    ids.insert(it->second);
  }
  return ids;
}

/// Read a single-channel 8-bit label PNG (pixel value = class id).
inline LabelMap load_label_map(const std::filesystem::path& path) {
  const Raster8 r = read_raster8(path);
  if (r.channels != 1) throw IoError(path.string() + ": label map must be single-channel");
  LabelMap labels(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const int id = r.bytes[static_cast<std::size_t>(y) * r.width + x];
      if (id >= kLabelCount) {
        throw IoError(path.string() + ": class id " + std::to_string(id) + " at (" +
                      std::to_string(x) + "," + std::to_string(y) + ") exceeds 149");
      }
      labels.set(x, y, id);
    }
  }
  return labels;
}

inline void save_label_map(const LabelMap& labels, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(labels.ids().begin(), labels.ids().end());
  detail::write_png(path, labels.width(), labels.height(), 1, bytes.data());
}

/// Nearest-neighbour resampling to a new geometry.
inline LabelMap resize_nearest(const LabelMap& labels, int width, int height) {
  LabelMap out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(labels.height() - 1, static_cast<int>((y + 0.5) * labels.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(labels.width() - 1, static_cast<int>((x + 0.5) * labels.width() / width));
      out.set(x, y, labels(sx, sy));
    }
  }
  return out;
}

inline BinaryMask mask_from_labels(const LabelMap& labels, const std::set<int>& ids) {
  if (ids.empty()) throw ContractError("mask_from_labels: empty class id set");
  BinaryMask mask(labels.width(), labels.height());
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) mask.set(x, y, ids.contains(labels(x, y)));
  }
  return mask;
}

/// Dilation by a Euclidean disk: a pixel is set if a set pixel lies within
/// distance `radius`.
template <typename Tag>
BitMap<Tag> dilate(const BitMap<Tag>& mask, int radius) {
  if (radius < 1) throw ContractError("dilate: radius must be >= 1");
  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);
    }
  }
  const int w = mask.width();
  const int h = mask.height();
  BitMap<Tag> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      for (const auto& [dx, dy] : disk) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < w && ny < h) out.set(nx, ny);
      }
    }
  }
  return out;
}

/// Pointwise AND of an edge map with a building mask.
inline EdgeMap apply_mask(const EdgeMap& edges, const BinaryMask& mask) {
  require_same_shape(edges, mask, "apply_mask");
  EdgeMap out(edges.width(), edges.height());
  auto e = edges.bits();
  auto m = mask.bits();
  auto o = out.bits();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (e[i] && m[i]) ? 1 : 0;
  return out;
}

}  // namespace isle
