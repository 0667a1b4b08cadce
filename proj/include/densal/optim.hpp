#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "densal/errors.hpp"

namespace densal {

// Adaptive-moment gradient descent with the usual bias correction.
class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
    if (!(lr > 0.0)) throw ConfigError("Adam: learning rate must be positive");
  }

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw Error("Adam: parameter/gradient size mismatch");
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      double mhat = m_[i] / bc1;
      double vhat = v_[i] / bc2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace densal
