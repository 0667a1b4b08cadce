#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "densal/errors.hpp"
#include "densal/geo.hpp"

namespace densal {

// Multi-scale sinusoidal encoding of planar location. Three unit directions
// at 0/120/240 degrees; wavelengths spaced geometrically between lambda_min
// and lambda_max. Output per scale and direction is [sin, cos] of the
// projected coordinate over that wavelength, so the dimension is 6 * scales.
struct LocationEncoderSpec {
  int scales = 16;
  double lambda_min = 100.0;      // meters
  double lambda_max = 1000000.0;  // meters

  int dim() const { return 6 * scales; }

  void validate() const {
    if (scales < 2) throw ConfigError("LocationEncoderSpec: need at least 2 scales");
    if (!(lambda_min > 0.0) || !(lambda_min < lambda_max)) {
      throw ConfigError("LocationEncoderSpec: need 0 < lambda_min < lambda_max");
    }
  }
};

namespace location_detail {

inline constexpr double kDirections[3][2] = {
    {1.0, 0.0},
    {-0.5, 0.8660254037844386},   // 120 degrees
    {-0.5, -0.8660254037844387},  // 240 degrees
};

}  // namespace location_detail

inline void encode_location(double x, double y, const LocationEncoderSpec& spec,
                            std::span<double> out) {
  spec.validate();
  if (out.size() != static_cast<std::size_t>(spec.dim())) {
    throw Error("encode_location: output span has wrong dimension");
  }
  const double growth =
      std::pow(spec.lambda_max / spec.lambda_min, 1.0 / (spec.scales - 1));
  std::size_t k = 0;
  double lambda = spec.lambda_min;
  for (int s = 0; s < spec.scales; ++s) {
    for (const auto& dir : location_detail::kDirections) {
      double phase = (x * dir[0] + y * dir[1]) / lambda;
      out[k++] = std::sin(phase);
      out[k++] = std::cos(phase);
    }
    lambda *= growth;
  }
}

inline std::vector<double> encode_location(PointM p, const LocationEncoderSpec& spec) {
  std::vector<double> out(spec.dim());
  encode_location(p.x, p.y, spec, out);
  return out;
}

inline double scale_wavelength(const LocationEncoderSpec& spec, int s) {
  const double growth =
      std::pow(spec.lambda_max / spec.lambda_min, 1.0 / (spec.scales - 1));
  return spec.lambda_min * std::pow(growth, static_cast<double>(s));
}

}  // namespace densal
