#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "densal/errors.hpp"
#include "densal/geo.hpp"

namespace densal {

// Multi-band 2D grid of scalar samples with a geotransform. Values are held
// as doubles in memory; the PGRD container on disk stores float32.
// The nodata mask is per pixel and shared by all bands.
class RasterGrid {
 public:
  RasterGrid() = default;

  RasterGrid(int width, int height, int bands, GeoTransform gt, double fill = 0.0)
      : width_(width), height_(height), bands_(bands), gt_(gt) {
    if (width <= 0 || height <= 0 || bands < 1) {
      throw ConfigError("RasterGrid: width/height must be positive and bands >= 1");
    }
    gt_.validate();
    values_.assign(static_cast<std::size_t>(bands) * height * width, fill);
    mask_.assign(static_cast<std::size_t>(height) * width, 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int bands() const { return bands_; }
  const GeoTransform& geotransform() const { return gt_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double at(int band, int row, int col) const { return values_[index(band, row, col)]; }
  double& at(int band, int row, int col) { return values_[index(band, row, col)]; }

  bool is_nodata(int row, int col) const {
    return mask_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set_nodata(int row, int col, bool nodata = true) {
    mask_[static_cast<std::size_t>(row) * width_ + col] = nodata ? 1 : 0;
  }
  bool any_nodata() const {
    for (auto m : mask_)
      if (m) return true;
    return false;
  }

  BoundsM bounds() const {
    return {gt_.origin_x, gt_.origin_y, gt_.origin_x + width_ * gt_.pixel_size,
            gt_.origin_y + height_ * gt_.pixel_size};
  }

  // Sum over one band, skipping nodata pixels.
  double band_sum(int band) const {
    double s = 0.0;
    for (int r = 0; r < height_; ++r)
      for (int c = 0; c < width_; ++c)
        if (!is_nodata(r, c)) s += at(band, r, c);
    return s;
  }

  RasterGrid crop(int row0, int col0, int rows, int cols) const {
    if (row0 < 0 || col0 < 0 || rows <= 0 || cols <= 0 || row0 + rows > height_ ||
        col0 + cols > width_) {
      throw Error("RasterGrid::crop: window out of range");
    }
    GeoTransform gt = gt_;
    gt.origin_x += col0 * gt_.pixel_size;
    gt.origin_y += row0 * gt_.pixel_size;
    RasterGrid out(cols, rows, bands_, gt);
    for (int b = 0; b < bands_; ++b)
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out.at(b, r, c) = at(b, row0 + r, col0 + c);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (is_nodata(row0 + r, col0 + c)) out.set_nodata(r, c);
    return out;
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int band, int row, int col) const {
    return (static_cast<std::size_t>(band) * height_ + row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  int bands_ = 0;
  GeoTransform gt_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

// ---------------------------------------------------------------------------
// PGRD container: little-endian; magic "PGRD", version u16=1, width u32,
// height u32, bands u16, dtype u8 (0 = float32), geotransform 3x float64
// (origin_x, origin_y, pixel_size), nodata sentinel float32, then band-major
// row-major float32 payload. Masked pixels are written as the sentinel in
// every band and recovered on read by matching band 0 against the sentinel
// (NaN sentinel, the default, matches via isnan).

namespace pgrd_detail {

static_assert(std::endian::native == std::endian::little,
              "PGRD writer assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

inline bool matches_sentinel(float value, float sentinel) {
  if (std::isnan(sentinel)) return std::isnan(value);
  return value == sentinel;
}

}  // namespace pgrd_detail

inline void write_pgrd(const std::filesystem::path& path, const RasterGrid& grid,
                       float nodata_sentinel = std::numeric_limits<float>::quiet_NaN()) {
  namespace d = pgrd_detail;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_pgrd: cannot open " + path.string());
  os.write("PGRD", 4);
  d::put<std::uint16_t>(os, 1);
  d::put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.width()));
  d::put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.height()));
  d::put<std::uint16_t>(os, static_cast<std::uint16_t>(grid.bands()));
  d::put<std::uint8_t>(os, 0);
  d::put<double>(os, grid.geotransform().origin_x);
  d::put<double>(os, grid.geotransform().origin_y);
  d::put<double>(os, grid.geotransform().pixel_size);
  d::put<float>(os, nodata_sentinel);
  for (int b = 0; b < grid.bands(); ++b)
    for (int r = 0; r < grid.height(); ++r)
      for (int c = 0; c < grid.width(); ++c) {
        float v = grid.is_nodata(r, c) ? nodata_sentinel : static_cast<float>(grid.at(b, r, c));
        d::put<float>(os, v);
      }
  if (!os) throw Error("write_pgrd: short write to " + path.string());
}

inline RasterGrid read_pgrd(const std::filesystem::path& path) {
  namespace d = pgrd_detail;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PrerequisiteError("read_pgrd: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PGRD", 4) != 0) {
    throw Error("read_pgrd: bad magic in " + path.string());
  }
  auto version = d::get<std::uint16_t>(is);
  if (version != 1) throw Error("read_pgrd: unsupported version in " + path.string());
  auto width = d::get<std::uint32_t>(is);
  auto height = d::get<std::uint32_t>(is);
  auto bands = d::get<std::uint16_t>(is);
  auto dtype = d::get<std::uint8_t>(is);
  if (dtype != 0) throw Error("read_pgrd: unsupported dtype in " + path.string());
  GeoTransform gt;
  gt.origin_x = d::get<double>(is);
  gt.origin_y = d::get<double>(is);
  gt.pixel_size = d::get<double>(is);
  auto sentinel = d::get<float>(is);
  if (!is) throw Error("read_pgrd: truncated header in " + path.string());

  RasterGrid grid(static_cast<int>(width), static_cast<int>(height), bands, gt);
  std::vector<float> payload(static_cast<std::size_t>(width) * height * bands);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!is) throw Error("read_pgrd: truncated payload in " + path.string());

  std::size_t i = 0;
  for (int b = 0; b < grid.bands(); ++b)
    for (int r = 0; r < grid.height(); ++r)
      for (int c = 0; c < grid.width(); ++c) grid.at(b, r, c) = payload[i++];
  for (int r = 0; r < grid.height(); ++r)
    for (int c = 0; c < grid.width(); ++c) {
      std::size_t at0 = (static_cast<std::size_t>(r) * width) + c;
      if (d::matches_sentinel(payload[at0], sentinel)) {
        grid.set_nodata(r, c);
        for (int b = 0; b < grid.bands(); ++b) grid.at(b, r, c) = 0.0;
      }
    }
  return grid;
}

}  // namespace densal
