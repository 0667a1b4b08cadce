#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "densal/mlp.hpp"
#include "densal/parallel.hpp"
#include "densal/raster.hpp"

namespace densal {

enum class UncertaintyMode { ensemble, mc_dropout };

inline UncertaintyMode parse_uncertainty_mode(const std::string& s) {
  if (s == "ensemble") return UncertaintyMode::ensemble;
  if (s == "mc_dropout") return UncertaintyMode::mc_dropout;
  throw ConfigError("unknown uncertainty mode: " + s);
}

// Per-pixel member predictions with their mean and population variance.
struct EnsemblePrediction {
  std::vector<RasterGrid> members;
  RasterGrid mean;
  RasterGrid variance;
};

// T models differing only in seed (cfg.seed + t). Members train in parallel;
// each member's training is single-threaded and deterministic.
inline std::vector<Mlp> train_ensemble(const PixelDataset& ds, const ModelSpec& spec,
                                       const TrainConfig& cfg, int T, int threads = 0,
                                       std::vector<TrainResult>* logs = nullptr) {
  if (T < 1) throw ConfigError("train_ensemble: T must be >= 1");
  std::vector<Mlp> members;
  members.reserve(T);
  for (int t = 0; t < T; ++t) members.emplace_back(spec, 0);  // placeholders
  std::vector<TrainResult> local_logs(T);
  parallel_for(static_cast<std::size_t>(T), threads, [&](std::size_t t) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = cfg.seed + t;
    members[t] = train_model(ds, spec, member_cfg, &local_logs[t]);
  });
  if (logs) *logs = std::move(local_logs);
  return members;
}

namespace ensemble_detail {

inline void reduce_members(const std::vector<RasterGrid>& members, RasterGrid& mean,
                           RasterGrid& variance) {
  const double T = static_cast<double>(members.size());
  const RasterGrid& first = members.front();
  mean = RasterGrid(first.width(), first.height(), 1, first.geotransform());
  variance = RasterGrid(first.width(), first.height(), 1, first.geotransform());
  for (int r = 0; r < first.height(); ++r)
    for (int c = 0; c < first.width(); ++c) {
      if (first.is_nodata(r, c)) {
        mean.set_nodata(r, c);
        variance.set_nodata(r, c);
        continue;
      }
      double m = 0.0;
      bool all_same = true;
      for (const auto& g : members) {
        m += g.at(0, r, c);
        if (g.at(0, r, c) != first.at(0, r, c)) all_same = false;
      }
      m /= T;
      // degenerate ensemble: equal members must give exactly zero variance,
      // which sum-of-squares arithmetic does not guarantee
      double v = 0.0;
      if (!all_same) {
        for (const auto& g : members) {
          double d = g.at(0, r, c) - m;
          v += d * d;
        }
        v /= T;
      }
      mean.at(0, r, c) = all_same ? first.at(0, r, c) : m;
      variance.at(0, r, c) = v;  // population normalizer
    }
}

}  // namespace ensemble_detail

// Ensemble mode: one eval pass per member, |models| must equal T.
// MC-dropout mode: T stochastic passes of the first model, which must have a
// positive dropout rate; pass t draws its masks from a stream seeded with
// mc_seed + t.
inline EnsemblePrediction predict_uncertainty(std::span<const Mlp> models,
                                              const RasterGrid& patch, UncertaintyMode mode,
                                              int T, std::uint64_t mc_seed = 0) {
  if (T < 1) throw ConfigError("predict_uncertainty: T must be >= 1");
  EnsemblePrediction out;
  if (mode == UncertaintyMode::ensemble) {
    if (static_cast<int>(models.size()) != T) {
      throw Error("predict_uncertainty: ensemble mode requires |models| = T");
    }
    for (const auto& m : models) out.members.push_back(m.predict(patch).density);
  } else {
    if (models.empty()) throw Error("predict_uncertainty: no model given");
    const Mlp& model = models.front();
    if (!(model.spec().dropout_rate > 0.0)) {
      throw Error("predict_uncertainty: mc_dropout requires dropout_rate > 0");
    }
    for (int t = 0; t < T; ++t) {
      std::mt19937_64 rng(mc_seed + static_cast<std::uint64_t>(t));
      out.members.push_back(model.predict_dropout(patch, rng).density);
    }
  }
  ensemble_detail::reduce_members(out.members, out.mean, out.variance);
  return out;
}

// Per-pixel embedding averaged over ensemble members.
inline EmbeddingField ensemble_mean_embedding(std::span<const Mlp> models,
                                              const RasterGrid& patch) {
  if (models.empty()) throw Error("ensemble_mean_embedding: no models");
  EmbeddingField acc = models.front().embed(patch);
  for (std::size_t t = 1; t < models.size(); ++t) {
    EmbeddingField f = models[t].embed(patch);
    if (f.data.size() != acc.data.size()) {
      throw Error("ensemble_mean_embedding: member embedding dimensions differ");
    }
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += f.data[i];
  }
  const double inv = 1.0 / static_cast<double>(models.size());
  for (double& v : acc.data) v *= inv;
  return acc;
}

}  // namespace densal
