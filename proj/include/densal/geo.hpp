#pragma once

#include <cmath>

#include "densal/errors.hpp"

namespace densal {

struct PointM {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned rectangle in the planar working frame, half-open on the
// upper edges.
struct BoundsM {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }

  bool contains(double x, double y) const {
    return x >= min_x && x < max_x && y >= min_y && y < max_y;
  }
};

// Affine pixel-to-world mapping in a planar frame (meters). Pixel (row, col)
// covers [origin_x + col*ps, origin_x + (col+1)*ps) x [origin_y + row*ps,
// origin_y + (row+1)*ps); rows grow with y.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 1.0;  // meters per pixel

  void validate() const {
    if (!(pixel_size > 0.0) || !std::isfinite(pixel_size) ||
        !std::isfinite(origin_x) || !std::isfinite(origin_y)) {
      throw ConfigError("GeoTransform: pixel_size must be positive and origins finite");
    }
  }

  double col_center_x(int col) const { return origin_x + (col + 0.5) * pixel_size; }
  double row_center_y(int row) const { return origin_y + (row + 0.5) * pixel_size; }

  int col_of_x(double x) const {
    return static_cast<int>(std::floor((x - origin_x) / pixel_size));
  }
  int row_of_y(double y) const {
    return static_cast<int>(std::floor((y - origin_y) / pixel_size));
  }

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

}  // namespace densal
