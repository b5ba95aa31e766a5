#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "isle/io.hpp"
#include "isle/maskops.hpp"
#include "test_support.hpp"

using namespace isle;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string("\"") + ISLE_CLI_PATH + "\" " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

class Cli : public ::testing::Test {
 protected:
  isle_test::TempDir tmp_;
  fs::path natural_ = isle_test::natural_image_paths()[0];
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  const RunResult unknown = run("smooth --bogus 1 a b");
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.output.find("smooth"), std::string::npos);
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("isle --labels a.png --mask b.png in raw ref").code, 1);
}

TEST_F(Cli, SmoothZeroLambdaRoundTrips) {
  const auto out = tmp_ / "s.png";
  ASSERT_EQ(run("smooth --lambda 0 " + q(natural_) + " " + q(out)).code, 0);
  const ImageRGB in = load_image(natural_);
  const ImageRGB back = load_image(out);
  ASSERT_TRUE(back.same_shape(in));
  for (std::size_t i = 0; i < in.data().size(); ++i) ASSERT_LE(std::abs(in.data()[i] - back.data()[i]), 1.0 / 255.0);
  EXPECT_NE(run("smooth --lambda 0 " + q(natural_) + " " + q(out)).output.find("warning"), std::string::npos);
}

TEST_F(Cli, EdgesAndContractErrors) {
  const auto out = tmp_ / "e.png";
  ASSERT_EQ(run("edges --low 0.05 --high 0.3 " + q(natural_) + " " + q(out)).code, 0);
  EXPECT_GT(load_edge_map(out).count(), 0u);
  const RunResult bad = run("edges --low 0.5 --high 0.3 " + q(natural_) + " " + q(tmp_ / "x.png"));
  EXPECT_EQ(bad.code, 3);
  EXPECT_FALSE(fs::exists(tmp_ / "x.png"));
}

TEST_F(Cli, IsleOnConstantImageWritesEmptyMaps) {
  save_image(ImageRGB(40, 30, 0.6), tmp_ / "flat.png");
  const RunResult r = run("isle " + q(tmp_ / "flat.png") + " " + q(tmp_ / "raw.png") + " " + q(tmp_ / "ref.png"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(load_edge_map(tmp_ / "raw.png").count(), 0u);
  EXPECT_EQ(load_edge_map(tmp_ / "ref.png").count(), 0u);
  EXPECT_NE(r.output.find("mode"), std::string::npos);
}

TEST_F(Cli, IsleIoAndConfigErrors) {
  const std::string outs = " " + q(tmp_ / "raw.png") + " " + q(tmp_ / "ref.png");
  EXPECT_EQ(run("isle " + q(tmp_ / "missing.png") + outs).code, 2);
  EXPECT_EQ(run("isle " + q(natural_) + " " + q(tmp_ / "no" / "raw.png") + " " + q(tmp_ / "ref.png")).code, 2);
  EXPECT_FALSE(fs::exists(tmp_ / "ref.png"));

  isle_test::write_file(tmp_ / "bad.cfg", "hough.vote_frak = 0.2\n");
  const RunResult bad = run("isle --config " + q(tmp_ / "bad.cfg") + " " + q(natural_) + outs);
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.output.find("hough.vote_frak"), std::string::npos);
  EXPECT_FALSE(fs::exists(tmp_ / "raw.png"));

  save_image(BinaryMask(5, 5, true), tmp_ / "small_mask.png");
  EXPECT_EQ(run("isle --mask " + q(tmp_ / "small_mask.png") + " " + q(natural_) + outs).code, 3);
}

TEST_F(Cli, IsleDeterministicWithIntermediates) {
  const auto dump = tmp_ / "dump";
  const std::string args = " " + q(natural_) + " " + q(tmp_ / "raw1.png") + " " + q(tmp_ / "ref1.png");
  ASSERT_EQ(run("isle --dump-intermediates " + q(dump) + args).code, 0);
  ASSERT_EQ(run("isle " + q(natural_) + " " + q(tmp_ / "raw2.png") + " " + q(tmp_ / "ref2.png")).code, 0);
  EXPECT_EQ(isle_test::read_file(tmp_ / "raw1.png"), isle_test::read_file(tmp_ / "raw2.png"));
  for (const char* stage : {"smoothed", "edges", "lines", "sharpened"}) {
    EXPECT_TRUE(fs::exists(dump / (std::string("iter_01_") + stage + ".png"))) << stage;
  }
}

TEST_F(Cli, IsleWithLabelsMatchesMask) {
  const ImageRGB img = load_image(natural_);
  LabelMap labels(img.width() / 2, img.height() / 2, 2);
  for (int y = 4; y < 20; ++y) {
    for (int x = 6; x < 26; ++x) labels.set(x, y, 1);
  }
  save_label_map(labels, tmp_ / "labels.png");
  save_image(mask_from_labels(resize_nearest(labels, img.width(), img.height()), {1}), tmp_ / "mask.png");
  ASSERT_EQ(run("isle --labels " + q(tmp_ / "labels.png") + " " + q(natural_) + " " + q(tmp_ / "r1.png") + " " +
                q(tmp_ / "f1.png"))
                .code,
            0);
  ASSERT_EQ(run("isle --mask " + q(tmp_ / "mask.png") + " " + q(natural_) + " " + q(tmp_ / "r2.png") + " " +
                q(tmp_ / "f2.png"))
                .code,
            0);
  EXPECT_EQ(load_edge_map(tmp_ / "f1.png"), load_edge_map(tmp_ / "f2.png"));
  EXPECT_TRUE(load_edge_map(tmp_ / "f1.png").subset_of(load_edge_map(tmp_ / "r1.png")));
}

TEST_F(Cli, MaskSubcommand) {
  LabelMap labels(20, 20, 2);
  labels.set(10, 10, 14);
  save_label_map(labels, tmp_ / "l.png");
  ASSERT_EQ(run("mask --labels " + q(tmp_ / "l.png") + " --dilate 0 " + q(tmp_ / "m0.png")).code, 0);
  EXPECT_EQ(load_mask(tmp_ / "m0.png").count(), 1u);
  ASSERT_EQ(run("mask --labels " + q(tmp_ / "l.png") + " --dilate 1 " + q(tmp_ / "m1.png")).code, 0);
  EXPECT_EQ(load_mask(tmp_ / "m1.png").count(), 5u);

  isle_test::write_file(tmp_ / "classes.txt", "wall=0\nbuilding=1\nwindowpane=8\nhouse=25\nawning=86\ndoor=3\n");
  ASSERT_EQ(run("mask --labels " + q(tmp_ / "l.png") + " --classes " + q(tmp_ / "classes.txt") + " --dilate 0 " +
                q(tmp_ / "m2.png"))
                .code,
            0);
  EXPECT_EQ(load_mask(tmp_ / "m2.png").count(), 0u);
  isle_test::write_file(tmp_ / "partial.txt", "wall=0\n");
  EXPECT_EQ(run("mask --labels " + q(tmp_ / "l.png") + " --classes " + q(tmp_ / "partial.txt") + " " +
                q(tmp_ / "m3.png"))
                .code,
            3);
}

TEST_F(Cli, EvalIdenticalMapsScoreOne) {
  EdgeMap e(32, 32);
  for (int i = 0; i < 32; ++i) e.set(i, i);
  save_image(e, tmp_ / "a.png");
  isle_test::write_file(tmp_ / "pairs.csv", "result_path,groundtruth_path,image_id\na.png,a.png,one\n");
  const RunResult r = run("eval --pairs " + q(tmp_ / "pairs.csv") + " --out " + q(tmp_ / "report.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(isle_test::read_file(tmp_ / "report.csv"), "image_id,method,ssim\none,isle,1.000000\n");
  EXPECT_EQ(isle_test::read_file(tmp_ / "report_summary.csv"), "method,mean_ssim,n\nisle,1.000000,1\n");

  isle_test::write_file(tmp_ / "broken.csv", "a.png,missing.png,two\n");
  EXPECT_EQ(run("eval --pairs " + q(tmp_ / "broken.csv") + " --out " + q(tmp_ / "r2.csv")).code, 2);
}
