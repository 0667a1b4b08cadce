#include <catch2/catch_amalgamated.hpp>

#include "densal/synthetic.hpp"

using namespace densal;

TEST_CASE("scene generation is deterministic given the seed") {
  SceneParams p;
  p.cloud_fraction = 0.3;
  auto a = generate_synthetic_scene(7, p);
  auto b = generate_synthetic_scene(7, p);
  CHECK(a.image.values() == b.image.values());
  CHECK(a.density.values() == b.density.values());
  CHECK(a.cloud.values() == b.cloud.values());
  CHECK(a.background_class == b.background_class);
  REQUIRE(a.trees.points.size() == b.trees.points.size());

  auto c = generate_synthetic_scene(8, p);
  CHECK(a.image.values() != c.image.values());
}

TEST_CASE("zero cloud fraction gives an identically zero cloud band") {
  SceneParams p;
  p.cloud_fraction = 0.0;
  auto scene = generate_synthetic_scene(3, p);
  for (double v : scene.cloud.values()) CHECK(v == 0.0);
}

TEST_CASE("cloud band stays within [0, 1]") {
  SceneParams p;
  p.cloud_fraction = 0.8;
  auto scene = generate_synthetic_scene(5, p);
  for (double v : scene.cloud.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("9 m lattice over a 1 ha interior block sums to the enumerated count") {
  SceneParams p;
  p.width = 64;
  p.height = 64;
  p.layout.push_back({{100, 100, 200, 200}, 9.0});

  // independent enumeration of lattice points (i + 0.5) * spacing inside 100 m
  int per_axis = 0;
  for (int i = 0;; ++i) {
    if ((i + 0.5) * 9.0 >= 100.0) break;
    ++per_axis;
  }
  int expected = per_axis * per_axis;
  REQUIRE(expected > 0);

  auto scene = generate_synthetic_scene(1, p);
  CHECK(scene.trees.points.size() == static_cast<std::size_t>(expected));
  CHECK(scene.density.band_sum(0) ==
        Catch::Approx(static_cast<double>(expected)).epsilon(1e-9));
}

TEST_CASE("degenerate extents are rejected") {
  SceneParams p;
  p.width = 31;
  CHECK_THROWS_AS(generate_synthetic_scene(1, p), ConfigError);
  p.width = 64;
  p.height = 8;
  CHECK_THROWS_AS(generate_synthetic_scene(1, p), ConfigError);
}

TEST_CASE("image bands respond to density") {
  SceneParams p;
  p.noise_sigma = 0.0;
  p.layout.push_back({{200, 200, 400, 400}, 8.0});
  auto scene = generate_synthetic_scene(2, p);

  double planted = 0.0, bare = 0.0;
  int n_planted = 0, n_bare = 0;
  for (int r = 0; r < scene.image.height(); ++r)
    for (int c = 0; c < scene.image.width(); ++c) {
      if (scene.density.at(0, r, c) > 0.5) {
        planted += scene.image.at(0, r, c);
        ++n_planted;
      } else if (scene.density.at(0, r, c) == 0.0) {
        bare += scene.image.at(0, r, c);
        ++n_bare;
      }
    }
  REQUIRE(n_planted > 0);
  REQUIRE(n_bare > 0);
  CHECK(planted / n_planted > bare / n_bare);
}
