#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace densal {

// Compensated (Kahan) accumulator. Reductions that must be reproducible
// across shard layouts feed values in a fixed order through this.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }

  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Element-wise compensated accumulation of fixed-length vectors.
class KahanVectorSum {
 public:
  explicit KahanVectorSum(std::size_t dim) : s_(dim, 0.0), c_(dim, 0.0) {}

  void add(std::span<const double> x) {
    for (std::size_t i = 0; i < s_.size(); ++i) {
      double y = x[i] - c_[i];
      double t = s_[i] + y;
      c_[i] = (t - s_[i]) - y;
      s_[i] = t;
    }
  }

  const std::vector<double>& value() const { return s_; }

 private:
  std::vector<double> s_;
  std::vector<double> c_;
};

}  // namespace densal
