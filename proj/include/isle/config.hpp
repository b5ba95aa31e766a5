#pragma once

// Plain-text pipeline configuration: one `key = value` per line, '#' starts a
// comment. Keys not present keep their default_config() value. Lists are
// whitespace- or comma-separated.
//
//   t_high = 120
//   lambda_seq = 0.001 0.003 0.005 0.008 0.01 0.02 0.03
//   medium.brightness_factor = 1.3
//   hough.vote_frac = 0.25

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "isle/pipeline.hpp"

namespace isle {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ConfigError(where + ": invalid number '" + text + "'");
  return value;
}

inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Field accessors keyed by their config-file name.
struct ConfigField {
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> parse;
  std::function<std::string(const PipelineConfig&)> format;
};

template <typename T, typename Get>
ConfigField scalar_field(Get get) {
  return {[get](PipelineConfig& c, const std::string& v, const std::string& where) {
            get(c) = parse_number<T>(v, where);
          },
          [get](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_number(get(c));
            } else {
              return std::to_string(get(c));
            }
          }};
}

inline const std::vector<std::pair<std::string, ConfigField>>& config_fields() {
  static const auto fields = [] {
    std::vector<std::pair<std::string, ConfigField>> f;
    f.emplace_back("t_high", scalar_field<int>([](auto& c) -> auto& { return c.t_high; }));
    f.emplace_back("t_low", scalar_field<int>([](auto& c) -> auto& { return c.t_low; }));
    f.emplace_back("lambda_seq",
                   ConfigField{[](PipelineConfig& c, const std::string& v, const std::string& where) {
                                 std::string text = v;
                                 std::replace(text.begin(), text.end(), ',', ' ');
                                 std::istringstream in(text);
                                 std::vector<double> seq;
                                 std::string tok;
                                 while (in >> tok) seq.push_back(parse_number<double>(tok, where));
                                 c.lambda_seq = std::move(seq);
                               },
                               [](const PipelineConfig& c) {
                                 std::string s;
                                 for (double v : c.lambda_seq) s += (s.empty() ? "" : " ") + format_number(v);
                                 return s;
                               }});
    for (Mode m : {Mode::high, Mode::medium, Mode::low}) {
      const std::string p = std::string(mode_name(m)) + ".";
      f.emplace_back(p + "canny_low",
                     scalar_field<double>([m](auto& c) -> auto& { return c.mode(m).canny.low; }));
      f.emplace_back(p + "canny_high",
                     scalar_field<double>([m](auto& c) -> auto& { return c.mode(m).canny.high; }));
      f.emplace_back(p + "canny_sigma",
                     scalar_field<double>([m](auto& c) -> auto& { return c.mode(m).canny.sigma; }));
      f.emplace_back(p + "max_iter",
                     scalar_field<int>([m](auto& c) -> auto& { return c.mode(m).max_iter; }));
      f.emplace_back(p + "brightness_factor", scalar_field<double>([m](auto& c) -> auto& {
                       return c.mode(m).brightness_factor;
                     }));
    }
    f.emplace_back("hough.rho_res", scalar_field<double>([](auto& c) -> auto& { return c.hough.rho_res; }));
    f.emplace_back("hough.theta_res",
                   scalar_field<double>([](auto& c) -> auto& { return c.hough.theta_res; }));
    f.emplace_back("hough.vote_frac",
                   scalar_field<double>([](auto& c) -> auto& { return c.hough.vote_frac; }));
    f.emplace_back("hough.nms_rho", scalar_field<int>([](auto& c) -> auto& { return c.hough.nms_rho; }));
    f.emplace_back("hough.nms_theta", scalar_field<int>([](auto& c) -> auto& { return c.hough.nms_theta; }));
    f.emplace_back("solver.beta0_factor",
                   scalar_field<double>([](auto& c) -> auto& { return c.solver.beta0_factor; }));
    f.emplace_back("solver.kappa", scalar_field<double>([](auto& c) -> auto& { return c.solver.kappa; }));
    f.emplace_back("solver.beta_max",
                   scalar_field<double>([](auto& c) -> auto& { return c.solver.beta_max; }));
    f.emplace_back("line_tol", scalar_field<double>([](auto& c) -> auto& { return c.line_tol; }));
    f.emplace_back("mask_dilation_radius",
                   scalar_field<int>([](auto& c) -> auto& { return c.mask_dilation_radius; }));
    return f;
  }();
  return fields;
}

}  // namespace detail

/// Parse a configuration and validate it. Unknown or repeated keys are errors.
inline PipelineConfig parse_config(std::istream& in, const std::string& origin = "<config>",
                                   std::vector<std::string>* warnings = nullptr) {
  PipelineConfig cfg = default_config();
  std::map<std::string, const detail::ConfigField*> by_name;
  for (const auto& [name, field] : detail::config_fields()) by_name[name] = &field;

  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    const auto it = by_name.find(key);
    if (it == by_name.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    it->second->parse(cfg, value, where + " (" + key + ")");
  }
  try {
    auto w = cfg.validate();
    if (warnings != nullptr) *warnings = std::move(w);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config");
  return parse_config(in, path.string(), warnings);
}

/// Serialize every field; parse_config(format_config(c)) == c.
inline std::string format_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : detail::config_fields()) out += name + " = " + field.format(cfg) + "\n";
  return out;
}

inline bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  return format_config(a) == format_config(b);
}

}  // namespace isle
