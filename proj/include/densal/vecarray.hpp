#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "densal/errors.hpp"

namespace densal {

// Dense row-major array of equal-length vectors (pixel embeddings,
// cluster inputs). Kept flat for cache locality.
class VecArray {
 public:
  VecArray() = default;
  explicit VecArray(std::size_t dim) : dim_(dim) {}
  VecArray(std::size_t dim, std::size_t count)
      : dim_(dim), data_(dim * count, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  void push_back(std::span<const double> v) {
    if (v.size() != dim_) throw Error("VecArray: dimension mismatch on insert");
    data_.insert(data_.end(), v.begin(), v.end());
  }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("squared_distance: dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

}  // namespace densal
