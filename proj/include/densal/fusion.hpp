#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "densal/errors.hpp"
#include "densal/raster.hpp"

namespace densal {

// Per-pixel mean of the predictions that are not masked at that pixel. A
// pixel stays masked only when every input masks it. Addends are sorted
// before summing so the result is exactly permutation-invariant.
inline RasterGrid late_fuse(std::span<const RasterGrid> predictions) {
  if (predictions.empty()) throw Error("late_fuse: need at least one prediction");
  const RasterGrid& first = predictions.front();
  for (const auto& p : predictions) {
    if (p.geotransform() != first.geotransform() || p.width() != first.width() ||
        p.height() != first.height() || p.bands() != first.bands()) {
      throw Error("late_fuse: geotransform or shape mismatch between predictions");
    }
  }
  RasterGrid out(first.width(), first.height(), first.bands(), first.geotransform());
  std::vector<double> addends;
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) {
      int n = 0;
      for (const auto& p : predictions)
        if (!p.is_nodata(r, c)) ++n;
      if (n == 0) {
        out.set_nodata(r, c);
        continue;
      }
      for (int b = 0; b < out.bands(); ++b) {
        addends.clear();
        for (const auto& p : predictions)
          if (!p.is_nodata(r, c)) addends.push_back(p.at(b, r, c));
        std::sort(addends.begin(), addends.end());
        double sum = 0.0;
        for (double v : addends) sum += v;
        out.at(b, r, c) = sum / n;
      }
    }
  return out;
}

inline RasterGrid late_fuse(const std::vector<RasterGrid>& predictions) {
  return late_fuse(std::span<const RasterGrid>(predictions));
}

}  // namespace densal
