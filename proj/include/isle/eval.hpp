#pragma once

// Batch SSIM scoring of extracted outline maps against drawn groundtruths.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "isle/io.hpp"
#include "isle/ssim.hpp"

namespace isle {

struct EvalPair {
  std::filesystem::path result;
  std::filesystem::path groundtruth;
  std::string image_id;
};

struct EvalRow {
  std::string image_id;
  std::string method;
  double ssim = 0.0;
};

struct EvalFailure {
  std::string image_id;
  std::string message;
};

struct EvalReport {
  std::string method;
  std::vector<EvalRow> rows;  // sorted by image id
  std::vector<EvalFailure> errors;
  double mean_ssim = 0.0;

  [[nodiscard]] std::size_t count() const { return rows.size(); }
  [[nodiscard]] bool ok() const { return errors.empty(); }
};

/// Read `result_path,groundtruth_path,image_id` rows. A first row whose first
/// field is literally `result_path` is treated as a header. Relative paths are
/// resolved against the list file's directory.
inline std::vector<EvalPair> read_pairs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open pairs list");
  const auto base = path.parent_path();
  std::vector<EvalPair> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      const auto b = f.find_first_not_of(" \t");
      const auto e = f.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
    }
    if (lineno == 1 && !fields.empty() && fields[0] == "result_path") continue;
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ContractError(path.string() + ":" + std::to_string(lineno) +
                          ": expected result_path,groundtruth_path,image_id");
    }
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path fp(p);
      return fp.is_absolute() ? fp : base / fp;
    };
    pairs.push_back({resolve(fields[0]), resolve(fields[1]), fields[2]});
  }
  return pairs;
}

/// Score every pair. Unreadable or mismatched pairs are reported in
/// `errors` and excluded from the mean. Pairs are scored on up to `workers`
/// threads; results do not depend on the worker count.
inline EvalReport evaluate_batch(const std::vector<EvalPair>& pairs, const std::string& method,
                                 const SsimParams& params = {}, unsigned workers = 0) {
  params.validate();
  struct Outcome {
    bool ok = false;
    double score = 0.0;
    std::string message;
  };
  std::vector<Outcome> outcomes(pairs.size());
  auto score_one = [&](std::size_t i) {
    try {
      const EdgeMap result = load_edge_map(pairs[i].result);
      const EdgeMap truth = load_edge_map(pairs[i].groundtruth);
      outcomes[i].score = ssim(to_unit_image(result), to_unit_image(truth), params);
      outcomes[i].ok = true;
    } catch (const Error& e) {
      outcomes[i].message = e.what();
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < pairs.size(); i += workers) score_one(i);
      });
    }
  }

  EvalReport report;
  report.method = method;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (outcomes[i].ok) {
      report.rows.push_back({pairs[i].image_id, method, outcomes[i].score});
    } else {
      report.errors.push_back({pairs[i].image_id, outcomes[i].message});
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.image_id < b.image_id; });
  // Sum in sorted order so the mean does not depend on input order.
  double total = 0.0;
  for (const auto& r : report.rows) total += r.ssim;
  report.mean_ssim = report.rows.empty() ? 0.0 : total / static_cast<double>(report.rows.size());
  return report;
}

inline std::string format_score(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

/// CSV with columns image_id,method,ssim.
inline void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "image_id,method,ssim\n";
  for (const auto& r : report.rows) out << r.image_id << ',' << r.method << ',' << format_score(r.ssim) << '\n';
}

/// CSV with columns method,mean_ssim,n.
inline void write_summary_csv(const EvalReport& report, std::ostream& out) {
  out << "method,mean_ssim,n\n" << report.method << ',' << format_score(report.mean_ssim) << ',' << report.count() << '\n';
}

inline void print_report_table(const EvalReport& report, std::ostream& out) {
  std::size_t width = 8;
  for (const auto& r : report.rows) width = std::max(width, r.image_id.size());
  out << std::left << std::setw(static_cast<int>(width)) << "image" << "  ssim\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.image_id << "  " << format_score(r.ssim) << '\n';
  }
  out << "method " << report.method << ": mean ssim " << format_score(report.mean_ssim) << " over "
      << report.count() << " image(s)\n";
  for (const auto& e : report.errors) out << "error [" << e.image_id << "]: " << e.message << '\n';
}

}  // namespace isle
