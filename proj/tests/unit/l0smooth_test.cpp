#include <gtest/gtest.h>

#include <random>

#include "isle/io.hpp"
#include "isle/l0smooth.hpp"
#include "test_support.hpp"

using namespace isle;

TEST(SupportCount, ConstantIsZero) { EXPECT_EQ(gradient_support_count(ImageRGB(9, 7, 0.3)), 0u); }

TEST(SupportCount, PeriodicStep) {
  ImageRGB img(4, 4, 0.0);
  for (int y = 0; y < 4; ++y) {
    for (int x = 2; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) img(x, y, c) = 1.0;
    }
  }
  // Column 1 steps up into column 2; column 3 wraps down into column 0.
  EXPECT_EQ(gradient_support_count(img), 8u);
}

TEST(SupportCount, BoundedByPixelCount) {
  const ImageRGB img = isle_test::random_image(13, 11, 2);
  EXPECT_LE(gradient_support_count(img, 0.0), img.pixel_count());
}

TEST(Objective, Examples) {
  const ImageRGB flat(5, 5, 0.4);
  EXPECT_EQ(l0_objective(flat, flat, 0.5), 0.0);

  const ImageRGB img = isle_test::random_image(8, 6, 3);
  EXPECT_DOUBLE_EQ(l0_objective(img, img, 0.07), 0.07 * static_cast<double>(gradient_support_count(img)));

  const ImageRGB in = isle_test::row_image({0.0, 1.0});
  const ImageRGB cand = isle_test::row_image({0.5, 0.5});
  EXPECT_NEAR(l0_objective(in, cand, 0.1), 1.5, 1e-12);

  EXPECT_THROW((void)l0_objective(in, flat, 0.1), ContractError);
}

TEST(SmoothParams, Validation) {
  SmoothParams p;
  EXPECT_NO_THROW(p.validate());
  p.lambda = -1.0;
  EXPECT_THROW(p.validate(), ContractError);
  p = {};
  p.kappa = 1.0;
  EXPECT_THROW(p.validate(), ContractError);
  p = {};
  p.beta_max = p.beta0_factor * p.lambda;
  EXPECT_THROW(p.validate(), ContractError);
}

TEST(RecommendedRange, Bounds) {
  EXPECT_TRUE(lambda_in_recommended_range(0.001));
  EXPECT_TRUE(lambda_in_recommended_range(0.1));
  EXPECT_FALSE(lambda_in_recommended_range(0.0005));
  EXPECT_FALSE(lambda_in_recommended_range(0.5));
}

TEST(L0Smooth, ZeroLambdaIsIdentity) {
  const ImageRGB img = isle_test::random_image(20, 14, 8);
  SmoothParams p;
  p.lambda = 0.0;
  EXPECT_EQ(l0_smooth(img, p), img);
}

TEST(L0Smooth, ConstantIsFixedPoint) {
  const ImageRGB img(16, 12, 0.37);
  for (double lambda : {0.001, 0.003, 0.005, 0.008, 0.01, 0.02, 0.03}) {
    SmoothParams p;
    p.lambda = lambda;
    EXPECT_EQ(l0_smooth(img, p), img) << lambda;
  }
}

TEST(L0Smooth, SpecSignalNearOptimum) {
  const std::vector<double> v = {0.1, 0.1, 0.1, 0.8, 0.8, 0.8, 0.1, 0.1};
  const ImageRGB img = isle_test::row_image(v);
  SmoothParams p;
  p.lambda = 0.02;
  const double got = l0_objective(img, l0_smooth(img, p), p.lambda);
  const double best = isle_test::l0_oracle_1d(v, p.lambda).objective;
  EXPECT_LE(got, 1.05 * best + 1e-12);
}

TEST(L0Smooth, LowContrastStepRemoved) {
  const std::vector<double> v = {0.4, 0.4, 0.4, 0.4, 0.45, 0.45, 0.45, 0.45};
  // The exact optimum is flat: 3 * n * a^2 / 4 = 0.015 < 2 * lambda.
  const auto oracle = isle_test::l0_oracle_1d(v, 0.03);
  for (double s : oracle.signal) EXPECT_DOUBLE_EQ(s, oracle.signal[0]);

  SmoothParams p;
  p.lambda = 0.03;
  const ImageRGB out = l0_smooth(isle_test::row_image(v), p);
  EXPECT_EQ(gradient_support_count(out), 0u);
}

TEST(L0Smooth, RandomRowsNearOptimum) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(8);
    for (double& x : v) x = u(rng);
    SmoothParams p;
    p.lambda = 0.02;
    const ImageRGB img = isle_test::row_image(v);
    const double got = l0_objective(img, l0_smooth(img, p), p.lambda);
    EXPECT_LE(got, 1.05 * isle_test::l0_oracle_1d(v, p.lambda).objective) << "trial " << trial;
  }
}

TEST(L0Smooth, OutputInRangeAndFeasible) {
  for (std::uint32_t seed = 0; seed < 3; ++seed) {
    const ImageRGB img = isle_test::random_image(24, 18, seed);
    for (double lambda : {0.001, 0.01, 0.05}) {
      SmoothParams p;
      p.lambda = lambda;
      const ImageRGB out = l0_smooth(img, p);
      for (double v : out.data()) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
      EXPECT_LE(l0_objective(img, out, lambda), l0_objective(img, img, lambda) + 1e-6);
    }
  }
}

TEST(L0Smooth, SmoothsNoiseOnFlatPatch) {
  std::mt19937 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  ImageRGB img(32, 32);
  for (double& v : img.data()) v = 0.5 + noise(rng);
  SmoothParams p;
  p.lambda = 0.05;
  EXPECT_LT(gradient_support_count(l0_smooth(img, p)), img.pixel_count() / 10);
}

TEST(L0Smooth, NonSquareAndOddSizes) {
  const ImageRGB img = isle_test::random_image(7, 3, 12);
  SmoothParams p;
  p.lambda = 0.01;
  const ImageRGB out = l0_smooth(img, p);
  EXPECT_TRUE(out.same_shape(img));
  EXPECT_LE(l0_objective(img, out, p.lambda), l0_objective(img, img, p.lambda) + 1e-6);
}

TEST(L0Smooth, GrayInstantiation) {
  const ImageGray img = isle_test::random_gray(10, 10, 1);
  SmoothParams p;
  p.lambda = 0.02;
  const ImageGray out = l0_smooth(img, p);
  EXPECT_LE(l0_objective(img, out, p.lambda), l0_objective(img, img, p.lambda) + 1e-6);
}

TEST(L0Smooth, Deterministic) {
  const ImageRGB img = isle_test::random_image(40, 30, 77);
  SmoothParams p;
  p.lambda = 0.008;
  EXPECT_EQ(l0_smooth(img, p), l0_smooth(img, p));
}

TEST(L0Smooth, NaturalImagesFeasible) {
  const auto images = isle_test::natural_images();
  ASSERT_EQ(images.size(), 20u);
  for (std::size_t i = 0; i < images.size(); ++i) {
    SmoothParams p;
    p.lambda = 0.01;
    const ImageRGB out = l0_smooth(images[i], p);
    EXPECT_LE(l0_objective(images[i], out, p.lambda), l0_objective(images[i], images[i], p.lambda) + 1e-6)
        << "image " << i;
  }
}
