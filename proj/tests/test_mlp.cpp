#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "densal/mlp.hpp"
#include "densal/synthetic.hpp"

using namespace densal;

namespace {

// Small dataset of random inputs and non-negative targets.
PixelDataset random_dataset(std::uint64_t seed, const ModelSpec& spec, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> input(0.0, 1.0);
  std::uniform_real_distribution<double> target(0.0, 2.0);
  PixelDataset ds;
  ds.input_dim = spec.input_dim();
  ds.inputs = VecArray(static_cast<std::size_t>(ds.input_dim));
  std::vector<double> row(ds.input_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : row) v = input(rng);
    ds.inputs.push_back(row);
    ds.targets.push_back(target(rng));
  }
  return ds;
}

PixelDataset dataset_from_scene(const SyntheticScene& scene, const ModelSpec& spec) {
  LabelledPatch patch{scene.image, scene.density};
  return build_pixel_dataset(std::span<const LabelledPatch>(&patch, 1), spec);
}

}  // namespace

TEST_CASE("training defaults match the published parameterization") {
  TrainConfig cfg;
  CHECK(cfg.learning_rate == 1e-4);
  CHECK(cfg.batch_size == 128);
}

TEST_CASE("analytic gradients agree with central finite differences") {
  ModelSpec spec;
  spec.bands = 2;
  spec.context_side = 1;
  spec.hidden = {8, 6};

  const double step = 1e-5;
  double worst = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    Mlp model(spec, 100 + draw);
    // randomize every parameter, heads included
    std::mt19937_64 rng(500 + draw);
    std::normal_distribution<double> dist(0.0, 0.7);
    for (auto& p : model.params()) p = dist(rng);

    auto ds = random_dataset(900 + draw, spec, 6);
    std::vector<double> analytic(model.param_count());
    model.loss(ds.inputs, ds.targets, analytic);

    for (std::size_t i = 0; i < model.param_count(); ++i) {
      double saved = model.params()[i];
      model.params()[i] = saved + step;
      double up = model.loss(ds.inputs, ds.targets);
      model.params()[i] = saved - step;
      double down = model.loss(ds.inputs, ds.targets);
      model.params()[i] = saved;
      double fd = (up - down) / (2.0 * step);
      double denom = std::max(std::abs(fd), std::abs(analytic[i]));
      double err = denom < 1e-7 ? std::abs(fd - analytic[i])
                                : std::abs(fd - analytic[i]) / denom;
      worst = std::max(worst, err);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("untrained model with zero-initialized heads predicts density 0") {
  ModelSpec spec;
  spec.bands = 3;
  Mlp model(spec, 42);
  RasterGrid patch(8, 8, 3, GeoTransform{});
  auto pred = model.predict(patch);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      CHECK(pred.density.at(0, r, c) == 0.0);
      CHECK(pred.class_prob.at(0, r, c) == 0.5);
    }
}

TEST_CASE("training on all-zero labels keeps predictions near zero") {
  ModelSpec spec;
  spec.bands = 4;
  SceneParams p;
  p.random_blocks = 0;  // background only: labels identically zero
  auto scene = generate_synthetic_scene(21, p);
  auto ds = dataset_from_scene(scene, spec);
  REQUIRE(ds.size() > 0);
  for (double t : ds.targets) REQUIRE(t == 0.0);

  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 3;
  cfg.seed = 5;
  Mlp model = train_model(ds, spec, cfg);

  auto held_out = generate_synthetic_scene(22, p);
  auto pred = model.predict(held_out.image);
  CHECK(pred.density.band_sum(0) / static_cast<double>(pred.density.pixel_count()) <= 0.05);
}

TEST_CASE("training is deterministic given the seed") {
  ModelSpec spec;
  spec.bands = 2;
  spec.context_side = 1;
  spec.hidden = {6, 4};
  auto ds = random_dataset(7, spec, 64);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 4;
  cfg.seed = 3;
  TrainResult log_a, log_b;
  Mlp a = train_model(ds, spec, cfg, &log_a);
  Mlp b = train_model(ds, spec, cfg, &log_b);
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  CHECK(log_a.epoch_loss == log_b.epoch_loss);
}

TEST_CASE("eval-mode prediction is a pure function of weights and patch") {
  ModelSpec spec;
  spec.bands = 4;
  spec.dropout_rate = 0.3;  // must not affect eval mode
  Mlp model(spec, 11);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist(0.0, 0.5);
  for (auto& p : model.params()) p = dist(rng);

  auto scene = generate_synthetic_scene(2, SceneParams{});
  auto p1 = model.predict(scene.image);
  auto p2 = model.predict(scene.image);
  CHECK(p1.density.values() == p2.density.values());
  CHECK(p1.class_prob.values() == p2.class_prob.values());
}

TEST_CASE("epoch losses are non-increasing in at least 90% of seeded runs") {
  ModelSpec spec;
  spec.bands = 4;
  SceneParams p;
  auto scene = generate_synthetic_scene(31, p);
  auto ds = dataset_from_scene(scene, spec);

  int monotone = 0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 6;
    cfg.seed = 100 + s;
    TrainResult log;
    train_model(ds, spec, cfg, &log);
    bool ok = true;
    for (std::size_t e = 1; e < log.epoch_loss.size(); ++e) {
      if (log.epoch_loss[e] > log.epoch_loss[e - 1]) ok = false;
    }
    if (ok) ++monotone;
  }
  INFO("monotone runs: " << monotone << "/" << runs);
  CHECK(monotone >= 9);
}

TEST_CASE("trained model separates plantation from bare ground") {
  ModelSpec spec;
  spec.bands = 4;
  SceneParams planted;
  planted.background_class = 0;
  SceneParams bare;
  bare.background_class = 0;
  bare.random_blocks = 0;

  std::vector<LabelledPatch> patches;
  for (int i = 0; i < 3; ++i) {
    auto s1 = generate_synthetic_scene(40 + i, planted);
    auto s2 = generate_synthetic_scene(50 + i, bare);
    patches.push_back({s1.image, s1.density});
    patches.push_back({s2.image, s2.density});
  }
  auto ds = build_pixel_dataset(patches, spec);
  TrainConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 10;
  cfg.seed = 9;
  Mlp model = train_model(ds, spec, cfg);

  auto plantation = generate_synthetic_scene(60, planted);
  auto ground = generate_synthetic_scene(61, bare);
  double mean_planted = model.predict(plantation.image).density.band_sum(0);
  double mean_bare = model.predict(ground.image).density.band_sum(0);
  CHECK(mean_planted > mean_bare);
}

TEST_CASE("embedding is deterministic with the configured width") {
  ModelSpec spec;
  spec.bands = 4;
  spec.hidden = {32, 64};
  Mlp model(spec, 77);
  auto scene = generate_synthetic_scene(3, SceneParams{});
  auto e1 = model.embed(scene.image);
  auto e2 = model.embed(scene.image);
  CHECK(e1.dim == 64);
  CHECK(e1.data == e2.data);
  CHECK(squared_distance(e1.at(5, 5), e2.at(5, 5)) == 0.0);
}

TEST_CASE("model rejects bad inputs") {
  ModelSpec spec;
  spec.bands = 4;
  Mlp model(spec, 1);
  RasterGrid wrong(8, 8, 2, GeoTransform{});
  CHECK_THROWS_AS(model.predict(wrong), Error);
  CHECK_THROWS_AS(model.embed(wrong), Error);

  PixelDataset empty;
  empty.input_dim = spec.input_dim();
  CHECK_THROWS_AS(train_model(empty, spec, TrainConfig{}), Error);

  auto ds = random_dataset(1, spec, 4);
  ds.targets[2] = -1.0;
  CHECK_THROWS_AS(train_model(ds, spec, TrainConfig{}), Error);
  ds.targets[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_model(ds, spec, TrainConfig{}), Error);
}

TEST_CASE("divergent training aborts with diagnostics") {
  ModelSpec spec;
  spec.bands = 2;
  spec.context_side = 1;
  spec.hidden = {4, 2};
  auto ds = random_dataset(3, spec, 32);
  TrainConfig cfg;
  cfg.learning_rate = 1e155;
  cfg.epochs = 50;
  cfg.seed = 2;
  CHECK_THROWS_WITH(train_model(ds, spec, cfg),
                    Catch::Matchers::ContainsSubstring("non-finite"));
}

TEST_CASE("invalid specs are rejected") {
  ModelSpec spec;
  spec.hidden = {8};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.hidden = {8, 1};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.hidden = {8, 4};
  spec.dropout_rate = 1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.dropout_rate = 0.0;
  spec.context_side = 2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("checkpoints round-trip spec and weights") {
  ModelSpec spec;
  spec.bands = 3;
  spec.hidden = {6, 4};
  spec.dropout_rate = 0.25;
  Mlp model(spec, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> dist(0.0, 0.5);
  for (auto& p : model.params()) p = dist(rng);

  auto dir = std::filesystem::temp_directory_path() / "densal_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / "model.pmdl";
  model.save(path);
  Mlp back = Mlp::load(path);
  CHECK(back.spec() == spec);
  REQUIRE(back.param_count() == model.param_count());
  for (std::size_t i = 0; i < model.param_count(); ++i) {
    CHECK(back.params()[i] == static_cast<double>(static_cast<float>(model.params()[i])));
  }
}
