// Command-line front end: smooth, edges, isle, mask, eval.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 config/contract error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isle/isle.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kContract = 3 };

// Outputs are only written once every input has been read and validated, so
// check the destinations up front.
void require_writable_parent(const fs::path& out) {
  const auto parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) throw isle::IoError(out.string() + ": output directory does not exist");
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

struct SmoothArgs {
  double lambda = 0.01;
  std::string input, output;
};

int run_smooth(const SmoothArgs& a) {
  isle::SmoothParams sp;
  sp.lambda = a.lambda;
  sp.validate();
  if (!isle::lambda_in_recommended_range(a.lambda)) {
    warn("lambda " + std::to_string(a.lambda) + " lies outside the usual range [0.001, 0.1]");
  }
  const auto img = isle::load_image(a.input);
  require_writable_parent(a.output);
  isle::save_image(isle::l0_smooth(img, sp), a.output);
  return kOk;
}

struct EdgesArgs {
  isle::CannyParams canny{0.05, 0.3, 1.4};
  std::string input, output;
};

int run_edges(const EdgesArgs& a) {
  a.canny.validate();
  const auto img = isle::load_image(a.input);
  require_writable_parent(a.output);
  isle::save_image(isle::canny(isle::to_luma(img), a.canny), a.output);
  return kOk;
}

struct IsleArgs {
  std::string config, labels, mask, classes, dump_dir;
  std::string input, out_raw, out_refined;
};

isle::ClassMap class_map_from(const std::string& path) {
  return path.empty() ? isle::default_class_map() : isle::load_class_map(path);
}

int run_isle(const IsleArgs& a) {
  std::vector<std::string> warnings;
  const isle::PipelineConfig cfg =
      a.config.empty() ? isle::default_config() : isle::load_config(a.config, &warnings);
  for (const auto& w : warnings) warn(w);

  const auto img = isle::load_image(a.input);
  std::optional<isle::BinaryMask> mask;
  if (!a.labels.empty()) {
    const auto ids = isle::building_ids(class_map_from(a.classes));
    auto labels = isle::load_label_map(a.labels);
    if (!labels.same_shape(img)) labels = isle::resize_nearest(labels, img.width(), img.height());
    mask = isle::mask_from_labels(labels, ids);
  } else if (!a.mask.empty()) {
    mask = isle::load_mask(a.mask);
    isle::require_same_shape(img, *mask, a.mask.c_str());
  }
  require_writable_parent(a.out_raw);
  require_writable_parent(a.out_refined);

  isle::IterationObserver observer;
  if (!a.dump_dir.empty()) {
    fs::create_directories(a.dump_dir);
    observer = [dir = fs::path(a.dump_dir)](const isle::IterationView& v) {
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "iter_%02d_", v.record.index);
      isle::save_image(v.smoothed, dir / (std::string(prefix) + "smoothed.png"));
      isle::save_image(v.edges, dir / (std::string(prefix) + "edges.png"));
      isle::save_image(v.marked, dir / (std::string(prefix) + "lines.png"));
      isle::save_image(v.sharpened, dir / (std::string(prefix) + "sharpened.png"));
    };
  }

  const auto out = isle::isle_run(img, mask, cfg, observer);
  isle::save_image(out.raw_edges, a.out_raw);
  isle::save_image(out.refined_edges, a.out_refined);

  std::cout << "mode " << isle::mode_name(out.mode) << " (median " << out.median << ")\n";
  for (const auto& r : out.iterations) {
    std::cout << "iter " << r.index << " lambda " << r.lambda << " lines " << r.line_count << '\n';
  }
  std::cout << "raw edges " << out.raw_edges.count() << ", refined edges " << out.refined_edges.count() << '\n';
  return kOk;
}

struct MaskArgs {
  std::string labels, classes, output;
  int dilate = 5;
};

int run_mask(const MaskArgs& a) {
  if (a.dilate < 0) throw isle::ContractError("--dilate must be >= 0");
  const auto ids = isle::building_ids(class_map_from(a.classes));
  const auto labels = isle::load_label_map(a.labels);
  require_writable_parent(a.output);
  auto mask = isle::mask_from_labels(labels, ids);
  if (a.dilate > 0) mask = isle::dilate(mask, a.dilate);
  isle::save_image(mask, a.output);
  return kOk;
}

struct EvalArgs {
  std::string pairs, output, summary, method = "isle";
};

int run_eval(const EvalArgs& a) {
  const auto pairs = isle::read_pairs_csv(a.pairs);
  require_writable_parent(a.output);
  fs::path summary = a.summary;
  if (summary.empty()) {
    summary = fs::path(a.output);
    summary.replace_extension();
    summary += "_summary.csv";
  }
  require_writable_parent(summary);

  const auto report = isle::evaluate_batch(pairs, a.method);
  {
    std::ofstream out(a.output);
    if (!out) throw isle::IoError(a.output + ": cannot write report");
    isle::write_report_csv(report, out);
  }
  {
    std::ofstream out(summary);
    if (!out) throw isle::IoError(summary.string() + ": cannot write summary");
    isle::write_summary_csv(report, out);
  }
  isle::print_report_table(report, std::cout);
  return report.ok() ? kOk : kIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building outline enhancement and extraction"};
  app.require_subcommand(1, 1);

  SmoothArgs smooth;
  auto* smooth_cmd = app.add_subcommand("smooth", "L0 gradient smoothing of an image");
  smooth_cmd->add_option("--lambda", smooth.lambda, "smoothing weight")->required();
  smooth_cmd->add_option("input", smooth.input, "input image (PNG/PPM/PGM)")->required();
  smooth_cmd->add_option("output", smooth.output, "output PNG")->required();

  EdgesArgs edges;
  auto* edges_cmd = app.add_subcommand("edges", "Canny edges of the image luminance");
  edges_cmd->add_option("--low", edges.canny.low, "low threshold in [0,1]")->capture_default_str();
  edges_cmd->add_option("--high", edges.canny.high, "high threshold in [0,1]")->capture_default_str();
  edges_cmd->add_option("--sigma", edges.canny.sigma, "Gaussian pre-smoothing sigma")->capture_default_str();
  edges_cmd->add_option("input", edges.input, "input image")->required();
  edges_cmd->add_option("output", edges.output, "output edge map PNG")->required();

  IsleArgs isle_args;
  auto* isle_cmd = app.add_subcommand("isle", "Iterative smoothing and line enhancing outline extraction");
  isle_cmd->add_option("--config", isle_args.config, "pipeline config file (defaults built in)");
  auto* labels_opt = isle_cmd->add_option("--labels", isle_args.labels, "semantic label map PNG");
  auto* mask_opt = isle_cmd->add_option("--mask", isle_args.mask, "binary building mask PNG (undilated)");
  labels_opt->excludes(mask_opt);
  mask_opt->excludes(labels_opt);
  isle_cmd->add_option("--classes", isle_args.classes, "class name=id file for --labels");
  isle_cmd->add_option("--dump-intermediates", isle_args.dump_dir, "directory for per-iteration PNGs");
  isle_cmd->add_option("input", isle_args.input, "input image")->required();
  isle_cmd->add_option("out_raw", isle_args.out_raw, "raw edge map PNG")->required();
  isle_cmd->add_option("out_refined", isle_args.out_refined, "masked edge map PNG")->required();

  MaskArgs mask;
  auto* mask_cmd = app.add_subcommand("mask", "Building mask from a semantic label map");
  mask_cmd->add_option("--labels", mask.labels, "semantic label map PNG")->required();
  mask_cmd->add_option("--classes", mask.classes, "class name=id file");
  mask_cmd->add_option("--dilate", mask.dilate, "dilation radius in pixels (0 = none)")->capture_default_str();
  mask_cmd->add_option("output", mask.output, "output mask PNG")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "SSIM of result edge maps against groundtruths");
  eval_cmd->add_option("--pairs", eval.pairs, "CSV: result_path,groundtruth_path,image_id")->required();
  eval_cmd->add_option("--out", eval.output, "per-image report CSV")->required();
  eval_cmd->add_option("--summary", eval.summary, "summary CSV (default: <out>_summary.csv)");
  eval_cmd->add_option("--method", eval.method, "method name recorded in the report")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (smooth_cmd->parsed()) return run_smooth(smooth);
    if (edges_cmd->parsed()) return run_edges(edges);
    if (isle_cmd->parsed()) return run_isle(isle_args);
    if (mask_cmd->parsed()) return run_mask(mask);
    if (eval_cmd->parsed()) return run_eval(eval);
  } catch (const isle::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const isle::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kContract;
  }
  return kUsage;
}
