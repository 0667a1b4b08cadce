#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "densal/checkpoint.hpp"
#include "densal/errors.hpp"
#include "densal/optim.hpp"
#include "densal/raster.hpp"
#include "densal/vecarray.hpp"

namespace densal {

// Reference density-regression network: a per-pixel multilayer perceptron over
// the pixel's band vector concatenated with a local context window. Two output
// heads share the trunk: a linear density head and a logistic class head. The
// activations of the last hidden layer are the deep feature embedding.
struct ModelSpec {
  int bands = 4;
  int context_side = 3;  // odd window side in pixels
  std::vector<int> hidden = {32, 16};
  double dropout_rate = 0.0;

  int input_dim() const { return bands * (1 + context_side * context_side); }
  int embedding_dim() const { return hidden.empty() ? 0 : hidden.back(); }

  void validate() const {
    if (bands < 1) throw ConfigError("ModelSpec: bands must be >= 1");
    if (context_side < 1 || context_side % 2 == 0) {
      throw ConfigError("ModelSpec: context_side must be odd and >= 1");
    }
    if (hidden.size() < 2) throw ConfigError("ModelSpec: need at least 2 hidden layers");
    for (int h : hidden)
      if (h < 1) throw ConfigError("ModelSpec: hidden widths must be positive");
    if (hidden.back() < 2) throw ConfigError("ModelSpec: embedding width must be >= 2");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
      throw ConfigError("ModelSpec: dropout_rate must be in [0, 1)");
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 128;
  int epochs = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  }
};

// Per-pixel embedding vectors over a patch.
struct EmbeddingField {
  int rows = 0;
  int cols = 0;
  int dim = 0;
  std::vector<double> data;

  EmbeddingField() = default;
  EmbeddingField(int r, int c, int d)
      : rows(r), cols(c), dim(d), data(static_cast<std::size_t>(r) * c * d, 0.0) {}

  std::span<double> at(int r, int c) {
    return {data.data() + (static_cast<std::size_t>(r) * cols + c) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> at(int r, int c) const {
    return {data.data() + (static_cast<std::size_t>(r) * cols + c) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// Flattened per-pixel training samples.
struct PixelDataset {
  int input_dim = 0;
  VecArray inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
};

struct LabelledPatch {
  RasterGrid image;
  RasterGrid label;  // band 0 holds the density target
};

namespace mlp_detail {

inline double stable_sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

// Cross-entropy of a logit against a binary indicator, in a form that cannot
// overflow.
inline double logit_ce(double u, double indicator) {
  return std::max(u, 0.0) - u * indicator + std::log1p(std::exp(-std::abs(u)));
}

// Features of pixel (r, c): the pixel's band vector followed by the context
// window, zero-padded outside the patch. Nodata neighbors contribute zeros.
inline void pixel_features(const RasterGrid& patch, int r, int c, int context_side,
                           std::span<double> out) {
  int bands = patch.bands();
  std::size_t k = 0;
  for (int b = 0; b < bands; ++b) out[k++] = patch.is_nodata(r, c) ? 0.0 : patch.at(b, r, c);
  int half = context_side / 2;
  for (int dr = -half; dr <= half; ++dr)
    for (int dc = -half; dc <= half; ++dc) {
      int rr = r + dr;
      int cc = c + dc;
      bool inside = rr >= 0 && rr < patch.height() && cc >= 0 && cc < patch.width();
      for (int b = 0; b < bands; ++b) {
        out[k++] = (inside && !patch.is_nodata(rr, cc)) ? patch.at(b, rr, cc) : 0.0;
      }
    }
}

}  // namespace mlp_detail

inline PixelDataset build_pixel_dataset(std::span<const LabelledPatch> patches,
                                        const ModelSpec& spec) {
  spec.validate();
  PixelDataset ds;
  ds.input_dim = spec.input_dim();
  ds.inputs = VecArray(static_cast<std::size_t>(ds.input_dim));
  std::vector<double> features(ds.input_dim);
  for (const auto& p : patches) {
    if (p.image.bands() != spec.bands) {
      throw Error("build_pixel_dataset: patch band count does not match the model spec");
    }
    if (p.label.width() != p.image.width() || p.label.height() != p.image.height()) {
      throw Error("build_pixel_dataset: image/label shape mismatch");
    }
    for (int r = 0; r < p.image.height(); ++r)
      for (int c = 0; c < p.image.width(); ++c) {
        if (p.image.is_nodata(r, c) || p.label.is_nodata(r, c)) continue;
        mlp_detail::pixel_features(p.image, r, c, spec.context_side, features);
        ds.inputs.push_back(features);
        ds.targets.push_back(p.label.at(0, r, c));
      }
  }
  return ds;
}

class Mlp {
 public:
  Mlp(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    spec_.validate();
    layout();
    params_.assign(param_count_, 0.0);
    // He-style init for the trunk; both heads start at zero so an untrained
    // model predicts density 0 everywhere.
    std::mt19937_64 rng(init_seed);
    int prev = spec_.input_dim();
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
      int width = spec_.hidden[l];
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / prev));
      double* w = params_.data() + weight_off_[l];
      for (int i = 0; i < width * prev; ++i) w[i] = dist(rng);
      prev = width;
    }
  }

  const ModelSpec& spec() const { return spec_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return param_count_; }

  struct PatchPrediction {
    RasterGrid density;
    RasterGrid class_prob;
  };

  // Eval-mode inference (dropout disabled): a pure function of the weights
  // and the patch.
  PatchPrediction predict(const RasterGrid& patch) const {
    check_bands(patch);
    PatchPrediction out{RasterGrid(patch.width(), patch.height(), 1, patch.geotransform()),
                        RasterGrid(patch.width(), patch.height(), 1, patch.geotransform())};
    Workspace ws(*this);
    std::vector<double> features(spec_.input_dim());
    for (int r = 0; r < patch.height(); ++r)
      for (int c = 0; c < patch.width(); ++c) {
        if (patch.is_nodata(r, c)) {
          out.density.set_nodata(r, c);
          out.class_prob.set_nodata(r, c);
          continue;
        }
        mlp_detail::pixel_features(patch, r, c, spec_.context_side, features);
        forward(features, ws, nullptr);
        out.density.at(0, r, c) = ws.y;
        out.class_prob.at(0, r, c) = mlp_detail::stable_sigmoid(ws.u);
      }
    return out;
  }

  // One stochastic forward pass per pixel with dropout masks drawn from rng.
  PatchPrediction predict_dropout(const RasterGrid& patch, std::mt19937_64& rng) const {
    check_bands(patch);
    if (!(spec_.dropout_rate > 0.0)) {
      throw Error("predict_dropout: model has dropout_rate = 0");
    }
    PatchPrediction out{RasterGrid(patch.width(), patch.height(), 1, patch.geotransform()),
                        RasterGrid(patch.width(), patch.height(), 1, patch.geotransform())};
    Workspace ws(*this);
    std::vector<double> features(spec_.input_dim());
    for (int r = 0; r < patch.height(); ++r)
      for (int c = 0; c < patch.width(); ++c) {
        if (patch.is_nodata(r, c)) {
          out.density.set_nodata(r, c);
          out.class_prob.set_nodata(r, c);
          continue;
        }
        mlp_detail::pixel_features(patch, r, c, spec_.context_side, features);
        forward(features, ws, &rng);
        out.density.at(0, r, c) = ws.y;
        out.class_prob.at(0, r, c) = mlp_detail::stable_sigmoid(ws.u);
      }
    return out;
  }

  // Per-pixel deep feature embedding (last hidden layer activations).
  EmbeddingField embed(const RasterGrid& patch) const {
    check_bands(patch);
    EmbeddingField field(patch.height(), patch.width(), spec_.embedding_dim());
    Workspace ws(*this);
    std::vector<double> features(spec_.input_dim());
    for (int r = 0; r < patch.height(); ++r)
      for (int c = 0; c < patch.width(); ++c) {
        if (patch.is_nodata(r, c)) continue;  // left as zeros; callers mask
        mlp_detail::pixel_features(patch, r, c, spec_.context_side, features);
        forward(features, ws, nullptr);
        auto dst = field.at(r, c);
        const auto& e = ws.act.back();
        std::copy(e.begin(), e.end(), dst.begin());
      }
    return field;
  }

  // Mean Eq.-style loss over the given samples, eval mode. Gradient written
  // to grad when non-empty (size must equal param_count()).
  double loss(const VecArray& inputs, std::span<const double> targets,
              std::span<double> grad = {}) const {
    if (inputs.count() != targets.size()) throw Error("Mlp::loss: inputs/targets mismatch");
    if (!grad.empty() && grad.size() != param_count_) {
      throw Error("Mlp::loss: gradient buffer size mismatch");
    }
    std::vector<std::size_t> idx(inputs.count());
    std::iota(idx.begin(), idx.end(), 0);
    return batch_loss(inputs, targets, idx, grad, nullptr);
  }

  void save(const std::filesystem::path& path) const {
    nlohmann::json header{{"kind", "mlp"},
                          {"bands", spec_.bands},
                          {"context_side", spec_.context_side},
                          {"hidden", spec_.hidden},
                          {"dropout_rate", spec_.dropout_rate}};
    write_pmdl(path, header, params_);
  }

  static Mlp load(const std::filesystem::path& path) {
    auto [header, params] = read_pmdl(path);
    if (header.value("kind", "") != "mlp") {
      throw Error("Mlp::load: checkpoint is not an mlp: " + path.string());
    }
    ModelSpec spec;
    spec.bands = header.at("bands").get<int>();
    spec.context_side = header.at("context_side").get<int>();
    spec.hidden = header.at("hidden").get<std::vector<int>>();
    spec.dropout_rate = header.at("dropout_rate").get<double>();
    Mlp model(spec, 0);
    if (params.size() != model.param_count_) {
      throw Error("Mlp::load: parameter payload size mismatch in " + path.string());
    }
    std::copy(params.begin(), params.end(), model.params_.begin());
    return model;
  }

 private:
  friend struct MlpTrainer;

  struct Workspace {
    explicit Workspace(const Mlp& m) {
      act.resize(m.spec_.hidden.size());
      pre.resize(m.spec_.hidden.size());
      mask.resize(m.spec_.hidden.size());
      delta.resize(m.spec_.hidden.size());
      for (std::size_t l = 0; l < m.spec_.hidden.size(); ++l) {
        act[l].assign(m.spec_.hidden[l], 0.0);
        pre[l].assign(m.spec_.hidden[l], 0.0);
        mask[l].assign(m.spec_.hidden[l], 1.0);
        delta[l].assign(m.spec_.hidden[l], 0.0);
      }
    }
    std::vector<std::vector<double>> act, pre, mask, delta;
    double y = 0.0;
    double u = 0.0;
  };

  void layout() {
    weight_off_.clear();
    bias_off_.clear();
    std::size_t off = 0;
    int prev = spec_.input_dim();
    for (int width : spec_.hidden) {
      weight_off_.push_back(off);
      off += static_cast<std::size_t>(width) * prev;
      bias_off_.push_back(off);
      off += static_cast<std::size_t>(width);
      prev = width;
    }
    density_w_off_ = off;
    off += prev;
    density_b_off_ = off++;
    class_w_off_ = off;
    off += prev;
    class_b_off_ = off++;
    param_count_ = off;
  }

  void check_bands(const RasterGrid& patch) const {
    if (patch.bands() != spec_.bands) {
      throw Error("Mlp: patch band count " + std::to_string(patch.bands()) +
                  " does not match spec bands " + std::to_string(spec_.bands));
    }
  }

  // Forward pass; when dropout_rng is non-null and the spec has dropout,
  // inverted-dropout masks are drawn per hidden unit.
  void forward(std::span<const double> input, Workspace& ws,
               std::mt19937_64* dropout_rng) const {
    const double* p = params_.data();
    int prev = spec_.input_dim();
    std::span<const double> h = input;
    const bool drop = dropout_rng != nullptr && spec_.dropout_rate > 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
      int width = spec_.hidden[l];
      const double* w = p + weight_off_[l];
      const double* b = p + bias_off_[l];
      for (int i = 0; i < width; ++i) {
        double z = b[i];
        const double* wrow = w + static_cast<std::size_t>(i) * prev;
        for (int j = 0; j < prev; ++j) z += wrow[j] * h[j];
        ws.pre[l][i] = z;
        double a = z > 0.0 ? z : 0.0;
        if (drop) {
          double keep = unit(*dropout_rng) >= spec_.dropout_rate
                            ? 1.0 / (1.0 - spec_.dropout_rate)
                            : 0.0;
          ws.mask[l][i] = keep;
          a *= keep;
        } else {
          ws.mask[l][i] = 1.0;
        }
        ws.act[l][i] = a;
      }
      h = ws.act[l];
      prev = width;
    }
    const double* wy = p + density_w_off_;
    const double* wc = p + class_w_off_;
    double y = params_[density_b_off_];
    double u = params_[class_b_off_];
    for (int j = 0; j < prev; ++j) {
      y += wy[j] * h[j];
      u += wc[j] * h[j];
    }
    ws.y = y;
    ws.u = u;
  }

  // Mean loss over the index subset; accumulates the mean gradient when grad
  // is non-empty. Samples are visited in index order.
  double batch_loss(const VecArray& inputs, std::span<const double> targets,
                    std::span<const std::size_t> idx, std::span<double> grad,
                    std::mt19937_64* dropout_rng) const {
    Workspace ws(*this);
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(idx.size());
    for (std::size_t s : idx) {
      auto input = inputs.row(s);
      double t = targets[s];
      forward(input, ws, dropout_rng);
      double indicator = t > 0.0 ? 1.0 : 0.0;
      double resid = ws.y - t;
      total += resid * resid + mlp_detail::logit_ce(ws.u, indicator);
      if (grad.empty()) continue;

      double gy = 2.0 * resid * inv_n;
      double gu = (mlp_detail::stable_sigmoid(ws.u) - indicator) * inv_n;
      const int emb = spec_.hidden.back();
      const auto& hlast = ws.act.back();
      for (int j = 0; j < emb; ++j) {
        grad[density_w_off_ + j] += gy * hlast[j];
        grad[class_w_off_ + j] += gu * hlast[j];
      }
      grad[density_b_off_] += gy;
      grad[class_b_off_] += gu;

      auto& dlast = ws.delta.back();
      for (int j = 0; j < emb; ++j) {
        dlast[j] = gy * params_[density_w_off_ + j] + gu * params_[class_w_off_ + j];
      }
      for (int l = static_cast<int>(spec_.hidden.size()) - 1; l >= 0; --l) {
        int width = spec_.hidden[l];
        int prev = l == 0 ? spec_.input_dim() : spec_.hidden[l - 1];
        std::span<const double> hprev =
            l == 0 ? input : std::span<const double>(ws.act[l - 1]);
        for (int i = 0; i < width; ++i) {
          double dz = ws.delta[l][i] * ws.mask[l][i];
          if (ws.pre[l][i] <= 0.0) dz = 0.0;
          ws.delta[l][i] = dz;
          if (dz == 0.0) continue;
          double* gw = grad.data() + weight_off_[l] + static_cast<std::size_t>(i) * prev;
          for (int j = 0; j < prev; ++j) gw[j] += dz * hprev[j];
          grad[bias_off_[l] + i] += dz;
        }
        if (l > 0) {
          auto& dprev = ws.delta[l - 1];
          std::fill(dprev.begin(), dprev.end(), 0.0);
          const double* w = params_.data() + weight_off_[l];
          for (int i = 0; i < width; ++i) {
            double dz = ws.delta[l][i];
            if (dz == 0.0) continue;
            const double* wrow = w + static_cast<std::size_t>(i) * prev;
            for (int j = 0; j < prev; ++j) dprev[j] += wrow[j] * dz;
          }
        }
      }
    }
    return total * inv_n;
  }

  ModelSpec spec_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_off_, bias_off_;
  std::size_t density_w_off_ = 0, density_b_off_ = 0;
  std::size_t class_w_off_ = 0, class_b_off_ = 0;
  std::size_t param_count_ = 0;
};

struct TrainResult {
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

struct MlpTrainer {
  // Minimizes the mean over pixels of (y - label)^2 + CE(class logit,
  // [label > 0]). Deterministic given cfg.seed: init, shuffling and dropout
  // draw from seed-derived streams.
  static Mlp train(const PixelDataset& ds, const ModelSpec& spec, const TrainConfig& cfg,
                   TrainResult* result = nullptr) {
    spec.validate();
    cfg.validate();
    if (ds.size() == 0) throw Error("train: empty dataset rejected");
    if (ds.input_dim != spec.input_dim()) {
      throw Error("train: dataset input_dim does not match the model spec");
    }
    for (double t : ds.targets) {
      if (!std::isfinite(t) || t < 0.0) {
        throw Error("train: labels must be finite and >= 0");
      }
    }

    Mlp model(spec, cfg.seed);
    Adam opt(model.param_count(), cfg.learning_rate);
    std::mt19937_64 shuffle_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);
    std::mt19937_64 dropout_rng(cfg.seed + 0x517cc1b727220a95ULL);

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(model.param_count());
    TrainResult log;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double epoch_sum = 0.0;
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(cfg.batch_size)) {
        std::size_t n = std::min<std::size_t>(cfg.batch_size, order.size() - start);
        std::span<const std::size_t> idx(order.data() + start, n);
        double batch = model.batch_loss(
            ds.inputs, ds.targets, idx, grad,
            spec.dropout_rate > 0.0 ? &dropout_rng : nullptr);
        if (!std::isfinite(batch)) {
          throw Error("train: loss became non-finite at epoch " + std::to_string(epoch) +
                      ", sample offset " + std::to_string(start) +
                      " (learning_rate=" + std::to_string(cfg.learning_rate) + ")");
        }
        epoch_sum += batch * static_cast<double>(n);
        opt.step(model.params(), grad);
      }
      log.epoch_loss.push_back(epoch_sum / static_cast<double>(ds.size()));
    }
    log.final_loss = log.epoch_loss.back();
    if (result) *result = log;
    return model;
  }
};

inline Mlp train_model(const PixelDataset& ds, const ModelSpec& spec, const TrainConfig& cfg,
                       TrainResult* result = nullptr) {
  return MlpTrainer::train(ds, spec, cfg, result);
}

}  // namespace densal
