#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "densal/fusion.hpp"
#include "densal/patches.hpp"

using namespace densal;

namespace {

RasterGrid flat(int w, int h, double value, int bands = 1) {
  RasterGrid g(w, h, bands, GeoTransform{0, 0, 10});
  for (int b = 0; b < bands; ++b)
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) g.at(b, r, c) = value;
  return g;
}

}  // namespace

TEST_CASE("clear sky tiling yields the closed-form patch count") {
  auto grid = flat(32, 32, 1.0);
  auto clear = flat(32, 32, 0.0);
  CHECK(plan_patches(grid, 16, 16, clear, 0.5).size() == 4);

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    int w = 16 + static_cast<int>(rng() % 40);
    int h = 16 + static_cast<int>(rng() % 40);
    int ps = 4 + static_cast<int>(rng() % 12);
    int stride = 1 + static_cast<int>(rng() % ps);
    auto g = flat(w, h, 1.0);
    auto sky = flat(w, h, 0.0);
    std::size_t expected =
        static_cast<std::size_t>((h - ps) / stride + 1) * ((w - ps) / stride + 1);
    CHECK(plan_patches(g, ps, stride, sky, 0.5).size() == expected);
  }
}

TEST_CASE("training and inference cloud thresholds are accepted") {
  auto grid = flat(32, 32, 1.0);
  auto sky = flat(32, 32, 0.2);
  CHECK_FALSE(plan_patches(grid, 16, 16, sky, 0.5).empty());  // training threshold
  CHECK(plan_patches(grid, 16, 16, sky, 0.1).empty());        // inference threshold
}

TEST_CASE("fully cloudy scene yields an empty patch list") {
  auto grid = flat(32, 32, 1.0);
  auto cloud = flat(32, 32, 1.0);
  CHECK(plan_patches(grid, 16, 16, cloud, 0.5).empty());
}

TEST_CASE("a single offending pixel excludes exactly its windows") {
  auto grid = flat(32, 32, 1.0);
  auto cloud = flat(32, 32, 0.0);
  cloud.at(0, 3, 3) = 0.9;  // inside the top-left 16x16 window only
  auto windows = plan_patches(grid, 16, 16, cloud, 0.5);
  REQUIRE(windows.size() == 3);
  for (const auto& w : windows) CHECK_FALSE((w.row0 == 0 && w.col0 == 0));
}

TEST_CASE("patch windows carry geotransform-derived centers") {
  auto grid = flat(32, 32, 1.0);
  auto sky = flat(32, 32, 0.0);
  auto windows = plan_patches(grid, 16, 16, sky, 0.5);
  REQUIRE(windows.size() == 4);
  CHECK(windows[0].center_x == Catch::Approx(80.0));
  CHECK(windows[0].center_y == Catch::Approx(80.0));
  CHECK(windows[3].center_x == Catch::Approx(240.0));
}

TEST_CASE("extract_patches crops the source grid") {
  auto grid = flat(32, 32, 0.0);
  grid.at(0, 17, 18) = 42.0;
  auto sky = flat(32, 32, 0.0);
  auto patches = extract_patches(grid, 16, 16, sky, 0.5);
  REQUIRE(patches.size() == 4);
  CHECK(patches[3].image.at(0, 1, 2) == 42.0);
}

TEST_CASE("patch preconditions are enforced") {
  auto grid = flat(16, 16, 1.0);
  auto sky = flat(16, 16, 0.0);
  CHECK_THROWS_AS(plan_patches(grid, 32, 16, sky, 0.5), ConfigError);
  CHECK_THROWS_AS(plan_patches(grid, 0, 16, sky, 0.5), ConfigError);
  auto small_sky = flat(8, 8, 0.0);
  CHECK_THROWS_AS(plan_patches(grid, 8, 8, small_sky, 0.5), Error);
}

TEST_CASE("late fusion of one input is the identity") {
  std::vector<RasterGrid> inputs{flat(6, 5, 3.5)};
  inputs[0].set_nodata(2, 2);
  auto fused = late_fuse(inputs);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) {
      CHECK(fused.is_nodata(r, c) == inputs[0].is_nodata(r, c));
      if (!fused.is_nodata(r, c)) CHECK(fused.at(0, r, c) == inputs[0].at(0, r, c));
    }
}

TEST_CASE("late fusion averages unmasked inputs per pixel") {
  std::vector<RasterGrid> inputs{flat(4, 4, 1.0), flat(4, 4, 3.0)};
  auto fused = late_fuse(inputs);
  CHECK(fused.at(0, 0, 0) == Catch::Approx(2.0));

  inputs[0].set_nodata(1, 1);
  inputs[0].at(0, 1, 1) = 999.0;  // ignored: masked
  inputs[1].at(0, 1, 1) = 5.0;
  fused = late_fuse(inputs);
  CHECK(fused.at(0, 1, 1) == Catch::Approx(5.0));
  CHECK_FALSE(fused.is_nodata(1, 1));

  inputs[1].set_nodata(1, 1);
  fused = late_fuse(inputs);
  CHECK(fused.is_nodata(1, 1));
}

TEST_CASE("late fusion is permutation-invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::vector<RasterGrid> inputs;
  for (int i = 0; i < 5; ++i) {
    auto g = flat(9, 7, 0.0, 2);
    for (int b = 0; b < 2; ++b)
      for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 9; ++c) g.at(b, r, c) = val(rng);
    if (i % 2 == 0) g.set_nodata(static_cast<int>(rng() % 7), static_cast<int>(rng() % 9));
    inputs.push_back(std::move(g));
  }
  auto reference = late_fuse(inputs);
  for (int trial = 0; trial < 6; ++trial) {
    std::shuffle(inputs.begin(), inputs.end(), rng);
    auto fused = late_fuse(inputs);
    CHECK(fused.values() == reference.values());
  }
}

TEST_CASE("late fusion rejects mismatched inputs") {
  std::vector<RasterGrid> inputs{flat(4, 4, 1.0), RasterGrid(4, 4, 1, GeoTransform{5, 0, 10})};
  CHECK_THROWS_AS(late_fuse(inputs), Error);
  CHECK_THROWS_AS(late_fuse(std::vector<RasterGrid>{}), Error);
}
