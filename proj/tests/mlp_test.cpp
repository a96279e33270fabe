#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "crowdocean/mlp.hpp"

using namespace crowdocean;

namespace {

MlpWeights random_weights(Rng& rng) {
  MlpWeights w;
  ParamVector p;
  for (double& v : p) v = rng.uniform(-0.5, 0.5);
  from_param_vector(p, w);
  for (int i = 0; i < kInputDim; ++i) {
    w.norm.mean[i] = rng.uniform(-1.0, 1.0);
    w.norm.stddev[i] = rng.uniform(0.5, 2.0);
  }
  return w;
}

std::vector<TrainingSample> random_batch(Rng& rng, std::size_t size) {
  std::vector<TrainingSample> batch(size);
  for (TrainingSample& s : batch) {
    for (double& v : s.input) v = rng.uniform(-2.0, 2.0);
    s.social = rng.uniform() < 0.5;
  }
  return batch;
}

}  // namespace

TEST_CASE("forward pass matches a hand-computed network") {
  MlpWeights w;
  w.hidden_w[0] = {0.1, -0.2, 0.3};
  w.hidden_b[0] = 0.05;
  w.output_w[0][0] = 1.0;
  w.output_b = {0.2, -0.1};

  const double h0 = std::tanh(0.1 * 1.0 - 0.2 * 2.0 + 0.3 * 3.0 + 0.05);
  const double l0 = 0.2 + h0;
  const double l1 = -0.1;
  const double expected = std::exp(l0) / (std::exp(l0) + std::exp(l1));

  const Probabilities p = forward(w, {1.0, 2.0, 3.0});
  CHECK(p.social == Catch::Approx(expected).margin(1e-12));
  CHECK(p.not_social == Catch::Approx(1.0 - expected).margin(1e-12));
}

TEST_CASE("normalization happens before the hidden layer") {
  MlpWeights w;
  w.hidden_w[0] = {1.0, 1.0, 1.0};
  w.output_w[0][0] = 4.0;
  w.norm.mean = {1.0, 2.0, 3.0};
  w.norm.stddev = {2.0, 2.0, 2.0};
  const Probabilities centered = forward(w, {1.0, 2.0, 3.0});
  CHECK(centered.social == Catch::Approx(0.5).margin(1e-15));
  const Probabilities shifted = forward(w, {3.0, 4.0, 5.0});
  const double l0 = 4.0 * std::tanh(3.0);
  CHECK(shifted.social == Catch::Approx(std::exp(l0) / (std::exp(l0) + 1.0)).margin(1e-12));
}

TEST_CASE("a fresh network is indifferent") {
  const MlpWeights w;
  const Probabilities p = forward(w, {0.4, 12.0, 3.0});
  CHECK(p.social == 0.5);
  CHECK(p.not_social == 0.5);
}

TEST_CASE("probabilities always form a distribution") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const MlpWeights w = random_weights(rng);
    InputVector in{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    const Probabilities p = forward(w, in);
    REQUIRE(p.social >= 0.0);
    REQUIRE(p.not_social >= 0.0);
    REQUIRE(p.social + p.not_social == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("non-finite inputs are rejected") {
  const MlpWeights w;
  CHECK_THROWS_AS(forward(w, {std::nan(""), 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(forward(w, {0.0, std::numeric_limits<double>::infinity(), 0.0}),
                  ValidationError);
}

TEST_CASE("normalizer fit uses population statistics") {
  std::vector<TrainingSample> samples(2);
  samples[0].input = {1.0, 5.0, 7.0};
  samples[1].input = {3.0, 5.0, 9.0};
  const Normalizer n = Normalizer::fit(samples);
  CHECK(n.mean[0] == Catch::Approx(2.0).margin(1e-12));
  CHECK(n.stddev[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(n.mean[1] == 5.0);
  CHECK(n.stddev[1] == 1.0);
  const InputVector z = n.apply({3.0, 5.0, 9.0});
  CHECK(z[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(z[1] == 0.0);
}

TEST_CASE("parameter vector round-trips the weight layout") {
  Rng rng(3);
  const MlpWeights w = random_weights(rng);
  const ParamVector p = to_param_vector(w);
  MlpWeights back;
  back.norm = w.norm;
  from_param_vector(p, back);
  CHECK(to_param_vector(back) == p);
  CHECK(back.hidden_w == w.hidden_w);
  CHECK(back.hidden_b == w.hidden_b);
  CHECK(back.output_w == w.output_w);
  CHECK(back.output_b == w.output_b);
  CHECK(p[0] == w.hidden_w[0][0]);
  CHECK(p[kHiddenDim * kInputDim] == w.hidden_b[0]);
  CHECK(p[kHiddenDim * kInputDim + kHiddenDim] == w.output_w[0][0]);
  CHECK(p[kParamCount - 1] == w.output_b[1]);
}

TEST_CASE("the parameter count is sixty-two") {
  CHECK(kParamCount == 62);
}

TEST_CASE("batch loss is the mean cross-entropy") {
  MlpWeights w;
  w.output_b = {1.0, 0.0};
  const double p_social = std::exp(1.0) / (std::exp(1.0) + 1.0);
  std::vector<TrainingSample> batch(2);
  batch[0].social = true;
  batch[1].social = false;
  const double expected = (-std::log(p_social) - std::log(1.0 - p_social)) / 2.0;
  CHECK(batch_loss(w, batch) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("analytic gradients agree with central differences") {
  Rng rng(2024);
  double worst = 0.0;
  for (int draw = 0; draw < 25; ++draw) {
    MlpWeights w = random_weights(rng);
    const auto batch = random_batch(rng, 8);
    ParamVector analytic;
    batch_loss_and_gradient(w, batch, analytic);

    ParamVector p = to_param_vector(w);
    ParamVector numeric{};
    const double h = 1e-5;
    for (int i = 0; i < kParamCount; ++i) {
      const double keep = p[i];
      p[i] = keep + h;
      from_param_vector(p, w);
      const double up = batch_loss(w, batch);
      p[i] = keep - h;
      from_param_vector(p, w);
      const double down = batch_loss(w, batch);
      p[i] = keep;
      numeric[i] = (up - down) / (2.0 * h);
    }
    from_param_vector(p, w);

    double diff = 0.0, na = 0.0, nn = 0.0;
    for (int i = 0; i < kParamCount; ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn += numeric[i] * numeric[i];
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-10);
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("model files round-trip exactly") {
  Rng rng(11);
  MlpWeights w = random_weights(rng);
  w.meta = {42, 217, 0.9375, true};
  const MlpWeights back = load_model(save_model(w));
  CHECK(to_param_vector(back) == to_param_vector(w));
  CHECK(back.norm.mean == w.norm.mean);
  CHECK(back.norm.stddev == w.norm.stddev);
  CHECK(back.meta.seed == w.meta.seed);
  CHECK(back.meta.iterations == w.meta.iterations);
  CHECK(back.meta.validation_accuracy == w.meta.validation_accuracy);
  CHECK(back.meta.trained == w.meta.trained);
}

TEST_CASE("model loading rejects malformed files") {
  const MlpWeights w;
  const std::string good = save_model(w);

  CHECK_THROWS_AS(load_model("not json"), FormatError);

  auto patched = nlohmann::json::parse(good);
  patched["version"] = 2;
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);

  patched = nlohmann::json::parse(good);
  patched["dims"] = {3, 9, 2};
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);

  patched = nlohmann::json::parse(good);
  patched["hidden_weights"].erase(0);
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);

  patched = nlohmann::json::parse(good);
  patched["hidden_bias"][3] = "oops";
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);

  patched = nlohmann::json::parse(good);
  patched["norm_std"][1] = 0.0;
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);

  patched = nlohmann::json::parse(good);
  patched.erase("training_meta");
  CHECK_THROWS_AS(load_model(patched.dump()), FormatError);
}

TEST_CASE("loading a missing model file is a configuration error") {
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), ConfigError);
}
