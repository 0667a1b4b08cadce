#pragma once

#include <string>
#include <vector>

#include "densal/errors.hpp"
#include "densal/log.hpp"
#include "densal/raster.hpp"

namespace densal {

struct PixelWindow {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
  double center_x = 0.0;
  double center_y = 0.0;
};

struct Patch {
  PixelWindow window;
  RasterGrid image;
};

// Tiles the grid with patch_size windows at the given stride and drops every
// window whose cloud probability exceeds max_cloud_prob at any pixel.
inline std::vector<PixelWindow> plan_patches(const RasterGrid& grid, int patch_size,
                                             int stride, const RasterGrid& cloud,
                                             double max_cloud_prob) {
  if (patch_size <= 0 || stride <= 0) {
    throw ConfigError("plan_patches: patch_size and stride must be positive");
  }
  if (patch_size > grid.width() || patch_size > grid.height()) {
    throw ConfigError("plan_patches: patch_size exceeds grid dimensions");
  }
  if (cloud.width() != grid.width() || cloud.height() != grid.height()) {
    throw Error("plan_patches: cloud raster does not match grid dimensions");
  }
  std::vector<PixelWindow> out;
  for (int r = 0; r + patch_size <= grid.height(); r += stride) {
    for (int c = 0; c + patch_size <= grid.width(); c += stride) {
      bool cloudy = false;
      for (int dr = 0; dr < patch_size && !cloudy; ++dr)
        for (int dc = 0; dc < patch_size; ++dc)
          if (cloud.at(0, r + dr, c + dc) > max_cloud_prob) {
            cloudy = true;
            break;
          }
      if (cloudy) continue;
      const GeoTransform& gt = grid.geotransform();
      PixelWindow w{r, c, patch_size, patch_size,
                    gt.origin_x + (c + patch_size / 2.0) * gt.pixel_size,
                    gt.origin_y + (r + patch_size / 2.0) * gt.pixel_size};
      out.push_back(w);
    }
  }
  if (out.empty()) {
    log_warn("plan_patches: no patch passed the cloud filter (threshold " +
             std::to_string(max_cloud_prob) + ")");
  }
  return out;
}

inline std::vector<Patch> extract_patches(const RasterGrid& grid, int patch_size, int stride,
                                          const RasterGrid& cloud, double max_cloud_prob) {
  std::vector<Patch> out;
  for (const auto& w : plan_patches(grid, patch_size, stride, cloud, max_cloud_prob)) {
    out.push_back({w, grid.crop(w.row0, w.col0, w.rows, w.cols)});
  }
  return out;
}

}  // namespace densal
