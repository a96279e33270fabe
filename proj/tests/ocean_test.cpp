#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "crowdocean/ocean.hpp"

using namespace crowdocean;

namespace {

FeatureSummary summary_of(double speed, double alpha, double sd, double col, double soc) {
  FeatureSummary s;
  s.agent_id = 1;
  s.mean_speed = speed;
  s.mean_angular_variation = alpha;
  s.std_angular_variation = sd;
  s.mean_collectivity = col;
  s.mean_socialization = soc;
  s.mean_isolation = 1.0 - soc;
  s.frame_count = 10;
  return s;
}

ItemResponsesQuantized uniform_levels(int level) {
  ItemResponsesQuantized q;
  q.values.fill(level);
  return q;
}

Rng& shared_rng() {
  static Rng rng(20240812);
  return rng;
}

ItemResponsesQuantized random_levels() {
  ItemResponsesQuantized q;
  for (int& v : q.values) v = static_cast<int>(shared_rng().below(5));
  return q;
}

}  // namespace

TEST_CASE("items follow the behavioral summary") {
  const ItemResponsesRaw r = answer_items(summary_of(1.0, 2.0, 0.0, 1.0, 1.0), {});
  CHECK(r.item(1) == Catch::Approx(1.5).margin(1e-12));
  CHECK(r.item(2) == 2.0);
  for (int k = 3; k <= 8; ++k) CHECK(r.item(k) == 0.0);
  CHECK(r.item(9) == 1.0);
  CHECK(r.item(10) == 1.0);
  CHECK(r.item(11) == 0.0);
  CHECK(r.item(12) == 3.0);
  CHECK(r.item(13) == Catch::Approx(1.0).margin(1e-12));
  CHECK(r.item(14) == Catch::Approx(2.5).margin(1e-12));
  CHECK(r.item(15) == Catch::Approx(0.4).margin(1e-12));
  for (int k = 16; k <= 21; ++k) CHECK(r.item(k) == 1.0);
  for (int k = 22; k <= 25; ++k) CHECK(r.item(k) == 2.0);
}

TEST_CASE("reciprocal guards bound the degenerate summaries") {
  const ItemResponsesRaw still = answer_items(summary_of(1.0, 0.0, 0.0, 0.0, 0.0), {});
  CHECK(still.item(1) == 11.0);   // 1 + 1/0.1
  CHECK(still.item(13) == 101.0); // 1 + 1/0.01
  CHECK(still.item(14) == 10.0);  // 0 + 0 + 1/0.1
  CHECK(still.item(15) == 0.1);
}

TEST_CASE("negative or non-finite summaries cannot answer items") {
  FeatureSummary s = summary_of(1.0, 2.0, 0.0, 0.5, 0.5);
  s.mean_speed = -1.0;
  CHECK_THROWS_AS(answer_items(s, {}), ValidationError);
  s = summary_of(1.0, 2.0, 0.0, 0.5, 0.5);
  s.mean_collectivity = std::nan("");
  CHECK_THROWS_AS(answer_items(s, {}), ValidationError);
}

TEST_CASE("guards must be positive") {
  GuardParams g;
  g.eps_alpha = 0.0;
  CHECK_THROWS_AS(answer_items(summary_of(1, 1, 1, 0.5, 0.5), g), ConfigError);
}

TEST_CASE("quantization scales by the per-video item maximum") {
  std::vector<ItemResponsesRaw> agents(2);
  agents[0].values.fill(10.0);
  agents[1].values.fill(4.9);
  const auto q = quantize_items(agents);
  REQUIRE(q.size() == 2);
  CHECK(q[0].item(1) == 4);  // the max itself
  CHECK(q[1].item(1) == 2);  // floor(5 * 4.9 / 10) = 2
}

TEST_CASE("an all-zero item stays at level zero") {
  std::vector<ItemResponsesRaw> agents(3);
  const auto q = quantize_items(agents);
  for (const auto& a : q)
    for (const int v : a.values) CHECK(v == 0);
}

TEST_CASE("quantization rejects bad raw values and empty videos") {
  const std::vector<ItemResponsesRaw> none;
  CHECK_THROWS_AS(quantize_items(none), InsufficientDataError);
  std::vector<ItemResponsesRaw> agents(1);
  agents[0].item(5) = -0.25;
  CHECK_THROWS_AS(quantize_items(agents), ValidationError);
  agents[0].item(5) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(quantize_items(agents), ValidationError);
}

TEST_CASE("quantized levels stay in range for random inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<ItemResponsesRaw> agents(1 + rng.below(6));
    for (auto& a : agents)
      for (double& v : a.values) v = rng.uniform(0.0, 50.0);
    for (const auto& q : quantize_items(agents))
      for (const int v : q.values) {
        REQUIRE(v >= 0);
        REQUIRE(v <= 4);
      }
  }
}

TEST_CASE("reversal is an involution over the level range") {
  CHECK(reverse_items(uniform_levels(0)).item(1) == 4);
  CHECK(reverse_items(uniform_levels(4)).item(1) == 0);
  for (int draw = 0; draw < 2000; ++draw) {
    const ItemResponsesQuantized q = random_levels();
    const ItemResponsesQuantized back = reverse_items(reverse_items(q));
    REQUIRE(back == q);
  }
}

TEST_CASE("items partition into the five dimensions as 1-1-18-2-3") {
  const auto dims = item_dimensions();
  std::map<Dimension, int> counts;
  for (const Dimension d : dims) ++counts[d];
  CHECK(counts[Dimension::O] == 1);
  CHECK(counts[Dimension::C] == 1);
  CHECK(counts[Dimension::E] == 18);
  CHECK(counts[Dimension::A] == 2);
  CHECK(counts[Dimension::N] == 3);
  CHECK(dims[1] == Dimension::O);
  CHECK(dims[0] == Dimension::C);
  CHECK(dims[8] == Dimension::A);
  CHECK(dims[12] == Dimension::N);
}

TEST_CASE("an all-fours agent pins the closed-form scores") {
  const OceanScore s = score_dimensions(uniform_levels(4), {});
  CHECK(s.o == 0.0);
  CHECK(s.c == 1.0);
  CHECK(s.e == Catch::Approx(44.0 / 72.0).margin(1e-15));
  CHECK(s.a == 1.0);
  CHECK(s.n == Catch::Approx(4.0 / 12.0).margin(1e-15));
}

TEST_CASE("an all-zeros agent pins the reversed scores") {
  const OceanScore s = score_dimensions(uniform_levels(0), {});
  CHECK(s.o == 1.0);
  CHECK(s.c == 0.0);
  CHECK(s.e == Catch::Approx(28.0 / 72.0).margin(1e-15));
  CHECK(s.a == 0.0);
  CHECK(s.n == Catch::Approx(8.0 / 12.0).margin(1e-15));
}

TEST_CASE("the loose scoring variant reverses item three") {
  ScoringOptions loose;
  loose.strict_paper = false;
  CHECK(score_dimensions(uniform_levels(4), loose).e == Catch::Approx(40.0 / 72.0).margin(1e-15));
  CHECK(score_dimensions(uniform_levels(0), loose).e == Catch::Approx(32.0 / 72.0).margin(1e-15));
  ItemResponsesQuantized q = uniform_levels(2);
  q.item(3) = 1;
  const double strict_e = score_dimensions(q, {}).e;
  const double loose_e = score_dimensions(q, loose).e;
  CHECK(loose_e - strict_e == Catch::Approx(2.0 / 72.0).margin(1e-12));
}

TEST_CASE("scores stay in the unit interval") {
  for (int draw = 0; draw < 5000; ++draw) {
    const OceanScore s = score_dimensions(random_levels(), {});
    for (int d = 0; d < 5; ++d) {
      REQUIRE(s.dimension(d) >= 0.0);
      REQUIRE(s.dimension(d) <= 1.0);
    }
  }
}

TEST_CASE("raising an agreeableness item never lowers agreeableness") {
  for (int draw = 0; draw < 500; ++draw) {
    ItemResponsesQuantized q = random_levels();
    double previous = -1.0;
    for (int level = 0; level <= 4; ++level) {
      q.item(9) = level;
      const double a = score_dimensions(q, {}).a;
      REQUIRE(a >= previous);
      previous = a;
    }
    previous = 2.0;
    for (int level = 0; level <= 4; ++level) {
      q.item(2) = level;
      const double o = score_dimensions(q, {}).o;
      REQUIRE(o <= previous);
      previous = o;
    }
  }
}

TEST_CASE("scoring validates levels and weights") {
  ItemResponsesQuantized q = uniform_levels(2);
  q.item(7) = 5;
  CHECK_THROWS_AS(score_dimensions(q, {}), ValidationError);
  q.item(7) = -1;
  CHECK_THROWS_AS(score_dimensions(q, {}), ValidationError);
  ScoringOptions opt;
  opt.weights.e = 0.5;  // sum now below one
  CHECK_THROWS_AS(score_dimensions(uniform_levels(1), opt), ConfigError);
}

TEST_CASE("video aggregation is the dimension-wise mean") {
  OceanScore a;
  a.o = 0.2; a.c = 0.4; a.e = 0.6; a.a = 0.8; a.n = 1.0;
  OceanScore b;
  b.o = 0.4; b.c = 0.2; b.e = 0.2; b.a = 0.0; b.n = 0.5;
  const std::vector<OceanScore> both{a, b};
  const OceanScore v = aggregate_video(both);
  CHECK(v.level == ScoreLevel::video);
  CHECK(v.o == Catch::Approx(0.3).margin(1e-15));
  CHECK(v.e == Catch::Approx(0.4).margin(1e-15));
  CHECK(v.n == Catch::Approx(0.75).margin(1e-15));
  const std::vector<OceanScore> one{a};
  CHECK(aggregate_video(one).o == a.o);
  const std::vector<OceanScore> none;
  CHECK_THROWS_AS(aggregate_video(none), InsufficientDataError);
}

TEST_CASE("country aggregation weighs videos equally") {
  OceanScore sparse;
  sparse.e = 0.4;
  OceanScore crowded;
  crowded.e = 0.8;
  std::map<std::string, std::vector<OceanScore>> by_country;
  by_country["BR"] = {sparse, crowded};
  by_country["CN"] = {crowded};
  const auto countries = aggregate_country(by_country);
  CHECK(countries.at("BR").e == Catch::Approx(0.6).margin(1e-15));
  CHECK(countries.at("BR").level == ScoreLevel::country);
  CHECK(countries.at("CN").e == 0.8);
  by_country["DE"] = {};
  CHECK_THROWS_AS(aggregate_country(by_country), InsufficientDataError);
}

TEST_CASE("score rows serialize with four decimals") {
  ScoreRow row;
  row.level = ScoreLevel::video;
  row.id = "plaza-01";
  row.country = "BR";
  row.score.o = 0.5;
  row.score.e = 2.0 / 3.0;
  const std::vector<ScoreRow> rows{row};
  const std::string csv = scores_to_csv(rows);
  CHECK(csv.rfind(kScoresCsvHeader, 0) == 0);
  CHECK(csv.find("video,plaza-01,BR,0.5000,0.0000,0.6667,0.0000,0.0000") != std::string::npos);
  const std::string json = scores_to_json(rows);
  CHECK(json.find("\"id\": \"plaza-01\"") != std::string::npos);
  CHECK(json.find("\"level\": \"video\"") != std::string::npos);
}
