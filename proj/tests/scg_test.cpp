#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "crowdocean/scg.hpp"

using namespace crowdocean;

namespace {

std::size_t social_count(const std::vector<TrainingSample>& v) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [](const TrainingSample& s) { return s.social; }));
}

// Two well-separated blobs in feature space, alternating labels.
std::vector<TrainingSample> two_blob_samples(Rng& rng, std::size_t n) {
  std::vector<TrainingSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    TrainingSample& s = out[i];
    s.social = (i % 2 == 0);
    if (s.social) {
      s.input = {0.9 + 0.02 * rng.normal(), 1.5 + 0.2 * rng.normal(),
                 6.0 + static_cast<double>(rng.below(3))};
    } else {
      s.input = {0.05 + 0.02 * rng.normal(), 12.0 + 0.5 * rng.normal(),
                 static_cast<double>(rng.below(2))};
    }
  }
  return out;
}

std::vector<TrainingSample> labeled_batch(std::size_t n, std::size_t social) {
  std::vector<TrainingSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].social = i < social;
    out[i].input = {static_cast<double>(i), 0.0, 0.0};
  }
  return out;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gradient_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sigma0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.split_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("split sizes follow the floor of the fraction") {
  Rng rng(1);
  const auto check_sizes = [&](std::size_t n, double frac, std::size_t expect_train) {
    const auto samples = labeled_batch(n, n / 2);
    const SplitSets s = split_dataset(samples, frac, rng);
    CHECK(s.train.size() == expect_train);
    CHECK(s.validation.size() == n - expect_train);
  };
  check_sizes(10, 0.7, 7);
  check_sizes(13, 0.7, 9);
  check_sizes(11, 0.5, 5);
  check_sizes(16000, 0.7, 11200);
}

TEST_CASE("split keeps at least one sample on each side") {
  Rng rng(2);
  const auto samples = labeled_batch(10, 5);
  CHECK(split_dataset(samples, 0.999, rng).train.size() == 9);
  CHECK(split_dataset(samples, 0.001, rng).train.size() == 1);
}

TEST_CASE("split rejects tiny datasets and bad fractions") {
  Rng rng(3);
  const auto nine = labeled_batch(9, 4);
  CHECK_THROWS_AS(split_dataset(nine, 0.7, rng), InsufficientDataError);
  const auto ten = labeled_batch(10, 5);
  CHECK_THROWS_AS(split_dataset(ten, 0.0, rng), ConfigError);
  CHECK_THROWS_AS(split_dataset(ten, 1.0, rng), ConfigError);
}

TEST_CASE("an exact multiple is not lost to rounding") {
  Rng rng(4);
  const auto samples = labeled_batch(20, 10);
  CHECK(split_dataset(samples, 0.7, rng).train.size() == 14);
}

TEST_CASE("splitting preserves the sample multiset") {
  Rng rng(5);
  const auto samples = labeled_batch(12, 6);
  const SplitSets s = split_dataset(samples, 0.7, rng);
  std::vector<double> seen;
  for (const auto& t : s.train) seen.push_back(t.input[0]);
  for (const auto& t : s.validation) seen.push_back(t.input[0]);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<double>(i));
}

TEST_CASE("splits are deterministic in the seed") {
  const auto samples = labeled_batch(30, 15);
  Rng a(77), b(77), c(78);
  const SplitSets sa = split_dataset(samples, 0.7, a);
  const SplitSets sb = split_dataset(samples, 0.7, b);
  const SplitSets sc = split_dataset(samples, 0.7, c);
  REQUIRE(sa.train.size() == sb.train.size());
  bool same = true, same_c = true;
  for (std::size_t i = 0; i < sa.train.size(); ++i) {
    same = same && sa.train[i].input == sb.train[i].input;
    same_c = same_c && sa.train[i].input == sc.train[i].input;
  }
  CHECK(same);
  CHECK_FALSE(same_c);
}

TEST_CASE("a one-sample minority always lands on the train side") {
  const auto samples = labeled_batch(10, 1);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const SplitSets s = split_dataset(samples, 0.7, rng);
    CHECK_FALSE(s.single_class);
    CHECK(social_count(s.train) == 1);
    CHECK(social_count(s.validation) == 0);
  }
}

TEST_CASE("a balanced set gives both classes to both sides") {
  const auto samples = labeled_batch(10, 5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const SplitSets s = split_dataset(samples, 0.7, rng);
    CHECK(social_count(s.train) > 0);
    CHECK(social_count(s.train) < s.train.size());
    CHECK(social_count(s.validation) > 0);
    CHECK(social_count(s.validation) < s.validation.size());
  }
}

TEST_CASE("a single-class set raises the warning flag") {
  const auto samples = labeled_batch(10, 0);
  Rng rng(6);
  const SplitSets s = split_dataset(samples, 0.7, rng);
  CHECK(s.single_class);
}

TEST_CASE("evaluate keeps honest books") {
  const MlpWeights w;  // indifferent network, predicts social everywhere
  const auto samples = labeled_batch(10, 3);
  const EvalReport r = evaluate(w, samples);
  CHECK(r.total == 10);
  CHECK(r.true_social == 3);
  CHECK(r.false_social == 7);
  CHECK(r.true_not_social == 0);
  CHECK(r.false_not_social == 0);
  CHECK(r.correct == 3);
  CHECK(r.accuracy == 0.3);
  CHECK(r.true_social + r.false_social + r.true_not_social + r.false_not_social == r.total);
}

TEST_CASE("training separates two blobs") {
  Rng rng(123);
  const auto samples = two_blob_samples(rng, 300);
  TrainConfig cfg;
  cfg.max_iterations = 200;
  cfg.seed = 9;
  const TrainOutcome out = scg_train(samples, cfg);
  CHECK(out.report.train_accuracy >= 0.99);
  CHECK(out.report.validation_accuracy >= 0.99);
  CHECK(out.report.final_loss < 0.1);
  CHECK_FALSE(out.report.single_class_warning);
  CHECK(out.model.meta.trained);
  CHECK(out.model.meta.seed == 9);
  CHECK(out.model.meta.iterations == out.report.iterations);
  CHECK(out.model.meta.validation_accuracy == out.report.validation_accuracy);
}

TEST_CASE("training is deterministic") {
  Rng rng(124);
  const auto samples = two_blob_samples(rng, 120);
  TrainConfig cfg;
  cfg.max_iterations = 60;
  cfg.seed = 4;
  const TrainOutcome a = scg_train(samples, cfg);
  const TrainOutcome b = scg_train(samples, cfg);
  CHECK(save_model(a.model) == save_model(b.model));
  CHECK(a.report.final_loss == b.report.final_loss);
  CHECK(a.report.iterations == b.report.iterations);
}

TEST_CASE("more iterations never increase the loss") {
  Rng rng(125);
  const auto samples = two_blob_samples(rng, 120);
  TrainConfig cfg;
  cfg.seed = 5;
  double previous = 1e300;
  for (const int budget : {5, 25, 125}) {
    cfg.max_iterations = budget;
    const double loss = scg_train(samples, cfg).report.final_loss;
    CHECK(loss <= previous + 1e-12);
    previous = loss;
  }
}

TEST_CASE("single-class training still runs and warns") {
  std::vector<TrainingSample> samples(12);
  Rng rng(126);
  for (auto& s : samples) {
    s.social = false;
    s.input = {rng.uniform(), rng.uniform(0.0, 10.0), 0.0};
  }
  TrainConfig cfg;
  cfg.max_iterations = 30;
  const TrainOutcome out = scg_train(samples, cfg);
  CHECK(out.report.single_class_warning);
  CHECK(out.report.train_accuracy == 1.0);
}

TEST_CASE("prediction requires a trained model") {
  const MlpWeights w;
  CHECK_THROWS_AS(predict_socialization(w, {0.5, 1.0, 2.0}), UsageError);
  MlpWeights trained = w;
  trained.meta.trained = true;
  CHECK(predict_socialization(trained, {0.5, 1.0, 2.0}) == 0.5);
}

TEST_CASE("isolation is the exact complement of socialization") {
  CHECK(isolation_from_socialization(0.3) == 0.7);
  CHECK(isolation_from_socialization(1.0) == 0.0);
  CHECK(isolation_from_socialization(0.0) == 1.0);
}
