#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "densal/checkpoint.hpp"
#include "densal/errors.hpp"
#include "densal/mlp.hpp"
#include "densal/optim.hpp"
#include "densal/vecarray.hpp"

namespace densal {

// Per-channel attention over the concatenated [location, deep-feature]
// vector: a = sigmoid(W f + b), z = a * f element-wise, so |z_i| <= |f_i|.
// With zero weights (the initial state) every gate is 0.5.
class AttentionFuser {
 public:
  explicit AttentionFuser(int dim) : dim_(dim) {
    if (dim < 1) throw ConfigError("AttentionFuser: dim must be >= 1");
    w_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    b_.assign(dim, 0.0);
  }

  int dim() const { return dim_; }
  std::span<double> weights() { return w_; }
  std::span<double> biases() { return b_; }

  void fuse(std::span<const double> f, std::span<double> z) const {
    if (f.size() != static_cast<std::size_t>(dim_) || z.size() != f.size()) {
      throw Error("AttentionFuser::fuse: dimension mismatch");
    }
    for (int i = 0; i < dim_; ++i) {
      double s = b_[i];
      const double* row = w_.data() + static_cast<std::size_t>(i) * dim_;
      for (int j = 0; j < dim_; ++j) s += row[j] * f[j];
      z[i] = mlp_detail::stable_sigmoid(s) * f[i];
    }
  }

  std::vector<double> fuse(std::span<const double> f) const {
    std::vector<double> z(f.size());
    fuse(f, z);
    return z;
  }

  void save(const std::filesystem::path& path) const {
    std::vector<double> params;
    params.reserve(w_.size() + b_.size());
    params.insert(params.end(), w_.begin(), w_.end());
    params.insert(params.end(), b_.begin(), b_.end());
    write_pmdl(path, nlohmann::json{{"kind", "attention"}, {"dim", dim_}}, params);
  }

  static AttentionFuser load(const std::filesystem::path& path) {
    auto [header, params] = read_pmdl(path);
    if (header.value("kind", "") != "attention") {
      throw Error("AttentionFuser::load: checkpoint is not an attention head");
    }
    AttentionFuser fuser(header.at("dim").get<int>());
    if (params.size() != fuser.w_.size() + fuser.b_.size()) {
      throw Error("AttentionFuser::load: payload size mismatch in " + path.string());
    }
    std::copy(params.begin(), params.begin() + fuser.w_.size(), fuser.w_.begin());
    std::copy(params.begin() + fuser.w_.size(), params.end(), fuser.b_.begin());
    return fuser;
  }

 private:
  friend struct AttentionTrainer;
  int dim_;
  std::vector<double> w_;  // dim x dim, row-major
  std::vector<double> b_;
};

// Fits the attention gates on the base labelled set. The gated embedding z
// feeds two throwaway linear heads (density and class) trained with the same
// two-head loss as the base model; only W and b are kept.
struct AttentionTrainer {
  static double train(AttentionFuser& fuser, const VecArray& features,
                      std::span<const double> targets, const TrainConfig& cfg) {
    cfg.validate();
    if (features.count() != targets.size() || features.count() == 0) {
      throw Error("AttentionTrainer: features/targets mismatch or empty");
    }
    if (features.dim() != static_cast<std::size_t>(fuser.dim_)) {
      throw Error("AttentionTrainer: feature dimension mismatch");
    }
    const int dim = fuser.dim_;
    const std::size_t n_params = fuser.w_.size() + fuser.b_.size() +
                                 2 * static_cast<std::size_t>(dim) + 2;

    std::vector<double> params(n_params, 0.0);
    auto unpack = [&](std::vector<double>& p) {
      return std::tuple<double*, double*, double*, double*, double*, double*>{
          p.data(),                                  // W
          p.data() + fuser.w_.size(),                // b
          p.data() + fuser.w_.size() + dim,          // u (density head)
          p.data() + fuser.w_.size() + 2 * dim,      // q (class head)
          p.data() + fuser.w_.size() + 3 * dim,      // c
          p.data() + fuser.w_.size() + 3 * dim + 1,  // d
      };
    };
    {
      // heads start small but nonzero so gradients reach the gates
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> dist(0.0, 0.1);
      auto [W, b, u, q, c, d] = unpack(params);
      (void)W;
      (void)b;
      (void)c;
      (void)d;
      for (int i = 0; i < dim; ++i) {
        u[i] = dist(rng);
        q[i] = dist(rng);
      }
    }

    Adam opt(n_params, cfg.learning_rate);
    std::mt19937_64 shuffle_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(features.count());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(n_params);
    std::vector<double> gate(dim), z(dim);

    double last_epoch_loss = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double epoch_sum = 0.0;
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.batch_size)) {
        std::size_t nb = std::min<std::size_t>(cfg.batch_size, order.size() - start);
        std::fill(grad.begin(), grad.end(), 0.0);
        auto [W, b, u, q, c, d] = unpack(params);
        auto [gW, gb, gu, gq, gc, gd] = unpack(grad);
        double inv = 1.0 / static_cast<double>(nb);
        double batch_sum = 0.0;
        for (std::size_t s = 0; s < nb; ++s) {
          auto f = features.row(order[start + s]);
          double t = targets[order[start + s]];
          double y = *c;
          double logit = *d;
          for (int i = 0; i < dim; ++i) {
            double pre = b[i];
            const double* row = W + static_cast<std::size_t>(i) * dim;
            for (int j = 0; j < dim; ++j) pre += row[j] * f[j];
            gate[i] = mlp_detail::stable_sigmoid(pre);
            z[i] = gate[i] * f[i];
            y += u[i] * z[i];
            logit += q[i] * z[i];
          }
          double ind = t > 0.0 ? 1.0 : 0.0;
          double resid = y - t;
          batch_sum += resid * resid + mlp_detail::logit_ce(logit, ind);
          double gy = 2.0 * resid * inv;
          double gl = (mlp_detail::stable_sigmoid(logit) - ind) * inv;
          *gc += gy;
          *gd += gl;
          for (int i = 0; i < dim; ++i) {
            gu[i] += gy * z[i];
            gq[i] += gl * z[i];
            double dz = gy * u[i] + gl * q[i];
            double ds = dz * f[i] * gate[i] * (1.0 - gate[i]);
            if (ds == 0.0) continue;
            double* grow = gW + static_cast<std::size_t>(i) * dim;
            for (int j = 0; j < dim; ++j) grow[j] += ds * f[j];
            gb[i] += ds;
          }
        }
        if (!std::isfinite(batch_sum)) {
          throw Error("AttentionTrainer: loss became non-finite at epoch " +
                      std::to_string(epoch));
        }
        epoch_sum += batch_sum;
        opt.step(params, grad);
      }
      last_epoch_loss = epoch_sum / static_cast<double>(features.count());
    }

    std::copy(params.begin(), params.begin() + fuser.w_.size(), fuser.w_.begin());
    std::copy(params.begin() + fuser.w_.size(),
              params.begin() + fuser.w_.size() + fuser.b_.size(), fuser.b_.begin());
    return last_epoch_loss;
  }
};

inline double train_attention(AttentionFuser& fuser, const VecArray& features,
                              std::span<const double> targets, const TrainConfig& cfg) {
  return AttentionTrainer::train(fuser, features, targets, cfg);
}

}  // namespace densal
