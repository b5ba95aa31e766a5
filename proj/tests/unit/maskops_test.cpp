#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "isle/maskops.hpp"
#include "test_support.hpp"

using namespace isle;

namespace {

constexpr int kSky = 2;
constexpr int kTree = 4;
constexpr int kBuilding = 1;

template <typename Tag>
BitMap<Tag> random_bits(int w, int h, double p, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution coin(p);
  BitMap<Tag> m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, coin(rng));
  }
  return m;
}

}  // namespace

TEST(ClassMap, DefaultsCoverBuildingClasses) {
  const auto ids = building_ids(default_class_map());
  EXPECT_EQ(ids, (std::set<int>{0, 1, 8, 14, 25, 86}));
}

TEST(ClassMap, ParsesNameIdLines) {
  std::istringstream in("# ADE20K\nwall=0\n building = 1 \n\nwindowpane=8 # glass\ndoor=14\nhouse=25\nawning=86\nsky=2\n");
  const ClassMap m = parse_class_map(in);
  EXPECT_EQ(m.at("building"), 1);
  EXPECT_EQ(m.at("sky"), 2);
  EXPECT_EQ(building_ids(m).size(), 6u);
}

TEST(ClassMap, RejectsMalformedEntries) {
  for (const char* text : {"wall\n", "wall=x\n", "wall=150\n", "=3\n", "wall=-1\n", "wall=1 2\n"}) {
    std::istringstream in(text);
    EXPECT_THROW((void)parse_class_map(in), ConfigError) << text;
  }
  std::istringstream partial("wall=0\nbuilding=1\n");
  EXPECT_THROW((void)building_ids(parse_class_map(partial)), ConfigError);
}

TEST(ClassMap, ShippedFileMatchesDefaults) {
  const auto path = isle_test::data_dir().parent_path().parent_path() / "config" / "ade20k_building_classes.txt";
  EXPECT_EQ(building_ids(load_class_map(path)), building_ids(default_class_map()));
}

TEST(LabelMap, RangeChecked) {
  LabelMap l(3, 3);
  EXPECT_THROW(l.set(0, 0, 150), ContractError);
  EXPECT_THROW(l.set(0, 0, -1), ContractError);
  l.set(2, 1, 149);
  EXPECT_EQ(l(2, 1), 149);
}

TEST(LabelMap, PngRoundTrip) {
  isle_test::TempDir tmp;
  LabelMap l(7, 5);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) l.set(x, y, (x * 31 + y * 17) % 150);
  }
  save_label_map(l, tmp / "labels.png");
  const LabelMap back = load_label_map(tmp / "labels.png");
  ASSERT_TRUE(back.same_shape(l));
  EXPECT_TRUE(std::equal(l.ids().begin(), l.ids().end(), back.ids().begin()));
  EXPECT_EQ(mask_from_labels(back, {kBuilding}), mask_from_labels(l, {kBuilding}));
}

TEST(LabelMap, RejectsBadFiles) {
  isle_test::TempDir tmp;
  const std::vector<std::uint8_t> rgb(4 * 3, 1);
  detail::write_png(tmp / "rgb.png", 2, 2, 3, rgb.data());
  EXPECT_THROW((void)load_label_map(tmp / "rgb.png"), IoError);
  const std::vector<std::uint8_t> big = {1, 2, 200, 3};
  detail::write_png(tmp / "big.png", 2, 2, 1, big.data());
  try {
    (void)load_label_map(tmp / "big.png");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("big.png"), std::string::npos);
  }
}

TEST(LabelMap, NearestResize) {
  LabelMap l(2, 2);
  l.set(0, 0, 1);
  l.set(1, 0, 2);
  l.set(0, 1, 3);
  l.set(1, 1, 4);
  const LabelMap up = resize_nearest(l, 4, 6);
  EXPECT_EQ(up(0, 0), 1);
  EXPECT_EQ(up(3, 0), 2);
  EXPECT_EQ(up(1, 2), 1);
  EXPECT_EQ(up(1, 3), 3);
  EXPECT_EQ(up(3, 5), 4);
  const LabelMap down = resize_nearest(up, 2, 2);
  EXPECT_TRUE(std::equal(down.ids().begin(), down.ids().end(), l.ids().begin()));
}

TEST(MaskFromLabels, Membership) {
  const auto ids = building_ids(default_class_map());
  EXPECT_EQ(mask_from_labels(LabelMap(8, 6, kSky), ids).count(), 0u);
  EXPECT_EQ(mask_from_labels(LabelMap(8, 6, kBuilding), ids).count(), 48u);

  LabelMap half(8, 6, kTree);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 4; ++x) half.set(x, y, kBuilding);
  }
  const BinaryMask m = mask_from_labels(half, ids);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) EXPECT_EQ(m(x, y), x < 4);
  }
  EXPECT_THROW((void)mask_from_labels(half, {}), ContractError);
}

TEST(MaskFromLabels, OnlyMembershipMatters) {
  const auto ids = building_ids(default_class_map());
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> id(0, 149);
  LabelMap a(16, 16), b(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const int v = id(rng);
      a.set(x, y, v);
      b.set(x, y, ids.contains(v) ? v : (v == kSky ? kTree : kSky));
    }
  }
  EXPECT_EQ(mask_from_labels(a, ids), mask_from_labels(b, ids));
}

TEST(Dilate, EmptyStaysEmpty) { EXPECT_EQ(dilate(BinaryMask(9, 9), 3).count(), 0u); }

TEST(Dilate, UnitDiskIsCross) {
  BinaryMask m(5, 5);
  m.set(2, 2);
  const BinaryMask d = dilate(m, 1);
  EXPECT_EQ(d.count(), 5u);
  EXPECT_TRUE(d(1, 2) && d(3, 2) && d(2, 1) && d(2, 3));
  EXPECT_FALSE(d(1, 1));
}

TEST(Dilate, MatchesBruteForceDistance) {
  const auto m = random_bits<BuildingTag>(32, 32, 0.03, 17);
  for (int r : {1, 2, 4}) {
    const BinaryMask d = dilate(m, r);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        bool near = false;
        for (int sy = 0; sy < 32 && !near; ++sy) {
          for (int sx = 0; sx < 32 && !near; ++sx) {
            near = m(sx, sy) && (sx - x) * (sx - x) + (sy - y) * (sy - y) <= r * r;
          }
        }
        ASSERT_EQ(d(x, y), near) << x << "," << y << " r=" << r;
      }
    }
  }
}

TEST(Dilate, ExtensiveIncreasingAndComposes) {
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    const auto m = random_bits<BuildingTag>(32, 32, 0.05, seed);
    const BinaryMask d2 = dilate(m, 2);
    const BinaryMask d3 = dilate(m, 3);
    EXPECT_TRUE(m.subset_of(d2));
    EXPECT_TRUE(d2.subset_of(d3));
    EXPECT_TRUE(d3.subset_of(dilate(d2, 3)));
    EXPECT_TRUE(d3.subset_of(dilate(dilate(m, 3), 2)));
  }
  EXPECT_THROW((void)dilate(BinaryMask(3, 3), 0), ContractError);
}

TEST(ApplyMask, AndSemantics) {
  const auto e = random_bits<EdgeTag>(20, 20, 0.4, 1);
  EXPECT_EQ(apply_mask(e, BinaryMask(20, 20, true)), e);
  EXPECT_EQ(apply_mask(e, BinaryMask(20, 20)).count(), 0u);
  const auto m = random_bits<BuildingTag>(20, 20, 0.5, 2);
  const EdgeMap out = apply_mask(e, m);
  EXPECT_TRUE(out.subset_of(e));
  EXPECT_TRUE(out.subset_of(m));
  EXPECT_LE(out.count(), e.count());
  EXPECT_THROW((void)apply_mask(e, BinaryMask(20, 21)), ContractError);
}
