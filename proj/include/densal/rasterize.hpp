#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "densal/annotations.hpp"
#include "densal/errors.hpp"
#include "densal/raster.hpp"

namespace densal {

struct RasterizeResult {
  RasterGrid density;       // 1 band, trees per output pixel
  double dropped_fraction;  // share of total kernel mass clipped at the raster edge
};

namespace rasterize_detail {

// 1-D overlap of [lo, hi] with cell i of a grid anchored at origin with the
// given cell size, for all cells touched by the interval.
inline void overlaps(double lo, double hi, double origin, double cell, long& first,
                     std::vector<double>& widths) {
  first = static_cast<long>(std::floor((lo - origin) / cell));
  long last = static_cast<long>(std::floor((hi - origin) / cell));
  widths.clear();
  for (long i = first; i <= last; ++i) {
    double a = std::max(lo, origin + static_cast<double>(i) * cell);
    double b = std::min(hi, origin + static_cast<double>(i + 1) * cell);
    widths.push_back(b > a ? b - a : 0.0);
  }
}

}  // namespace rasterize_detail

// Spreads each tree's unit mass uniformly over a kernel_side x kernel_side
// square centered at its point, resolved on a hi-res grid whose cells nest
// exactly inside the output pixels, then sums the hi-res cells under each
// output pixel. Mass falling outside the raster is dropped and reported.
inline RasterizeResult rasterize_density(const TreeAnnotationSet& trees, double hi_res_gsd,
                                         double kernel_side, double out_gsd) {
  if (!(hi_res_gsd > 0.0) || !(out_gsd > 0.0)) {
    throw ConfigError("rasterize_density: grid spacings must be positive");
  }
  if (!(kernel_side > 0.0)) {
    throw ConfigError("rasterize_density: kernel_side must be positive");
  }
  double ratio_f = out_gsd / hi_res_gsd;
  long ratio = std::lround(ratio_f);
  if (ratio < 1 || std::abs(ratio_f - static_cast<double>(ratio)) > 1e-9) {
    throw ConfigError("rasterize_density: hi_res_gsd must divide out_gsd exactly (ratio " +
                      std::to_string(ratio_f) + ")");
  }

  const BoundsM& b = trees.bounds;
  if (!(b.width() > 0.0) || !(b.height() > 0.0)) {
    throw ConfigError("rasterize_density: degenerate block bounds");
  }
  int width = static_cast<int>(std::ceil(b.width() / out_gsd - 1e-9));
  int height = static_cast<int>(std::ceil(b.height() / out_gsd - 1e-9));
  GeoTransform gt{b.min_x, b.min_y, out_gsd};
  RasterGrid density(width, height, 1, gt);

  const long hi_cols = static_cast<long>(width) * ratio;
  const long hi_rows = static_cast<long>(height) * ratio;
  const double inv_mass = 1.0 / (kernel_side * kernel_side);

  double dropped = 0.0;
  std::vector<double> wx, wy;
  for (std::size_t idx = 0; idx < trees.points.size(); ++idx) {
    const PointM& p = trees.points[idx];
    if (!b.contains(p.x, p.y)) {
      throw Error("rasterize_density: tree " + std::to_string(idx) +
                  " lies outside the raster extent");
    }
    long col0, row0;
    rasterize_detail::overlaps(p.x - kernel_side / 2, p.x + kernel_side / 2, b.min_x,
                               hi_res_gsd, col0, wx);
    rasterize_detail::overlaps(p.y - kernel_side / 2, p.y + kernel_side / 2, b.min_y,
                               hi_res_gsd, row0, wy);
    for (std::size_t iy = 0; iy < wy.size(); ++iy) {
      long hi_row = row0 + static_cast<long>(iy);
      for (std::size_t ix = 0; ix < wx.size(); ++ix) {
        long hi_col = col0 + static_cast<long>(ix);
        double mass = wx[ix] * wy[iy] * inv_mass;
        if (mass <= 0.0) continue;
        if (hi_row < 0 || hi_row >= hi_rows || hi_col < 0 || hi_col >= hi_cols) {
          dropped += mass;
        } else {
          density.at(0, static_cast<int>(hi_row / ratio), static_cast<int>(hi_col / ratio)) +=
              mass;
        }
      }
    }
  }

  double dropped_fraction =
      trees.points.empty() ? 0.0 : dropped / static_cast<double>(trees.points.size());
  return {std::move(density), dropped_fraction};
}

}  // namespace densal
