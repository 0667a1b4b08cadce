#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "densal/errors.hpp"
#include "densal/raster.hpp"
#include "densal/rasterize.hpp"

namespace densal {

// A planted rectangle. Trees sit on a square lattice with the given spacing:
// point (i, j) at (rect.min_x + (i + 0.5) * spacing, rect.min_y + (j + 0.5) * spacing)
// for every lattice point inside the rectangle.
struct PlantingBlock {
  BoundsM rect;
  double spacing = 9.0;  // meters between trees
};

struct SceneParams {
  int width = 64;   // output pixels, >= 32
  int height = 64;  // output pixels, >= 32
  int bands = 4;
  double gsd = 10.0;
  double hi_res_gsd = 0.625;
  double kernel_side = 20.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  // Explicit plantation layout; when empty, random_blocks rectangles are
  // drawn from the seed, kept far enough from the edge that kernels stay
  // interior.
  std::vector<PlantingBlock> layout;
  int random_blocks = 2;
  double planting_gsd = 9.0;
  double spacing_jitter = 0.25;

  // Spectral model per band k: a_k * density + b_k * class_factor + noise.
  int background_class = -1;  // -1 draws a class from the seed
  int background_classes = 2;
  double gain_scale = 1.0;
  std::vector<double> band_gain;        // a_k; defaults cycled when empty
  std::vector<double> band_background;  // b_k; defaults cycled when empty

  double noise_sigma = 0.02;
  double cloud_fraction = 0.0;  // approximate cloud coverage target, [0, 1]
};

struct SyntheticScene {
  RasterGrid image;    // params.bands bands
  RasterGrid density;  // 1 band, trees per pixel
  RasterGrid cloud;    // 1 band, probability in [0, 1]
  TreeAnnotationSet trees;
  int background_class = 0;
};

namespace synthetic_detail {

inline double default_gain(int band) {
  static constexpr double base[] = {0.90, 0.55, 0.35, 0.70, 0.45, 0.60};
  return base[band % 6];
}

inline double default_background(int band) {
  static constexpr double base[] = {0.12, 0.18, 0.25, 0.20, 0.15, 0.22};
  return base[band % 6];
}

inline std::vector<PointM> lattice_points(const PlantingBlock& block) {
  std::vector<PointM> pts;
  if (!(block.spacing > 0.0)) throw ConfigError("PlantingBlock: spacing must be positive");
  for (int j = 0;; ++j) {
    double y = block.rect.min_y + (j + 0.5) * block.spacing;
    if (y >= block.rect.max_y) break;
    for (int i = 0;; ++i) {
      double x = block.rect.min_x + (i + 0.5) * block.spacing;
      if (x >= block.rect.max_x) break;
      pts.push_back({x, y});
    }
  }
  return pts;
}

}  // namespace synthetic_detail

inline SyntheticScene generate_synthetic_scene(std::uint64_t seed, const SceneParams& p) {
  if (p.width < 32 || p.height < 32) {
    throw ConfigError("generate_synthetic_scene: degenerate extent (need >= 32x32 pixels)");
  }
  if (p.bands < 1) throw ConfigError("generate_synthetic_scene: bands must be >= 1");
  if (p.cloud_fraction < 0.0 || p.cloud_fraction > 1.0) {
    throw ConfigError("generate_synthetic_scene: cloud_fraction must be in [0, 1]");
  }
  if (p.noise_sigma < 0.0) {
    throw ConfigError("generate_synthetic_scene: noise_sigma must be >= 0");
  }

  std::mt19937_64 rng(seed);
  const double scene_w = p.width * p.gsd;
  const double scene_h = p.height * p.gsd;
  BoundsM bounds{p.origin_x, p.origin_y, p.origin_x + scene_w, p.origin_y + scene_h};

  // Plantation layout. Random rectangles keep a kernel-width margin so every
  // tree's mass lands inside the scene.
  std::vector<PlantingBlock> layout = p.layout;
  if (layout.empty() && p.random_blocks > 0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double margin = p.kernel_side / 2 + p.planting_gsd;
    for (int k = 0; k < p.random_blocks; ++k) {
      double bw = (0.25 + 0.30 * unit(rng)) * scene_w;
      double bh = (0.25 + 0.30 * unit(rng)) * scene_h;
      bw = std::min(bw, scene_w - 2 * margin);
      bh = std::min(bh, scene_h - 2 * margin);
      double bx = bounds.min_x + margin + unit(rng) * (scene_w - 2 * margin - bw);
      double by = bounds.min_y + margin + unit(rng) * (scene_h - 2 * margin - bh);
      double spacing = p.planting_gsd * (1.0 + p.spacing_jitter * (2.0 * unit(rng) - 1.0));
      layout.push_back({{bx, by, bx + bw, by + bh}, spacing});
    }
  }

  SyntheticScene scene;
  scene.trees.block_id = "scene";
  scene.trees.bounds = bounds;
  for (const auto& block : layout) {
    auto pts = synthetic_detail::lattice_points(block);
    scene.trees.points.insert(scene.trees.points.end(), pts.begin(), pts.end());
  }
  scene.density =
      rasterize_density(scene.trees, p.hi_res_gsd, p.kernel_side, p.gsd).density;

  scene.background_class =
      p.background_class >= 0
          ? p.background_class
          : static_cast<int>(std::uniform_int_distribution<int>(
                0, std::max(1, p.background_classes) - 1)(rng));
  double class_factor =
      0.6 + 0.8 * (p.background_classes > 1
                       ? static_cast<double>(scene.background_class) / (p.background_classes - 1)
                       : 0.0);

  GeoTransform gt{p.origin_x, p.origin_y, p.gsd};
  scene.image = RasterGrid(p.width, p.height, p.bands, gt);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int b = 0; b < p.bands; ++b) {
    double a_k = p.gain_scale * (b < static_cast<int>(p.band_gain.size())
                                     ? p.band_gain[b]
                                     : synthetic_detail::default_gain(b));
    double b_k = (b < static_cast<int>(p.band_background.size())
                      ? p.band_background[b]
                      : synthetic_detail::default_background(b)) *
                 class_factor;
    for (int r = 0; r < p.height; ++r)
      for (int c = 0; c < p.width; ++c) {
        double n = p.noise_sigma > 0.0 ? p.noise_sigma * noise(rng) : 0.0;
        scene.image.at(b, r, c) = a_k * scene.density.at(0, r, c) + b_k + n;
      }
  }

  scene.cloud = RasterGrid(p.width, p.height, 1, gt, 0.0);
  if (p.cloud_fraction > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double blob_radius = std::min(p.width, p.height) / 8.0;
    double blob_area = 3.141592653589793 * blob_radius * blob_radius;
    int n_blobs = std::max(
        1, static_cast<int>(std::lround(p.cloud_fraction * p.width * p.height / blob_area)));
    struct Blob {
      double cx, cy, radius, peak;
    };
    std::vector<Blob> blobs(n_blobs);
    for (auto& blob : blobs) {
      blob.cx = unit(rng) * p.width;
      blob.cy = unit(rng) * p.height;
      blob.radius = blob_radius * (0.6 + 0.8 * unit(rng));
      blob.peak = 0.7 + 0.3 * unit(rng);
    }
    for (int r = 0; r < p.height; ++r)
      for (int c = 0; c < p.width; ++c) {
        double v = 0.0;
        for (const auto& blob : blobs) {
          double dx = c + 0.5 - blob.cx;
          double dy = r + 0.5 - blob.cy;
          double s2 = 2.0 * (blob.radius / 2) * (blob.radius / 2);
          v += blob.peak * std::exp(-(dx * dx + dy * dy) / s2);
        }
        scene.cloud.at(0, r, c) = std::clamp(v, 0.0, 1.0);
      }
  }
  return scene;
}

}  // namespace densal
