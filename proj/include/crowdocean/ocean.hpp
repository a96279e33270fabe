#pragma once

// Mapping from per-agent behavioral summaries to Big Five personality
// scores. The 25 questionnaire items are answered with feature arithmetic,
// quantized per video into five levels, reverse-scored where the item keys
// to the low pole of its dimension, and folded into O, C, E, A, N with the
// 4/4/72/8/12 percent dimension weights. Video and country scores are plain
// means one level up.

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdocean/core.hpp"
#include "crowdocean/features.hpp"

namespace crowdocean {

inline constexpr int kItemCount = 25;
inline constexpr int kQuantLevels = 5;
inline constexpr int kMaxLevel = kQuantLevels - 1;

// Singularity guards for the reciprocal item terms. Without them a single
// near-zero denominator dominates the per-video maximum and flattens every
// other agent's quantized level.
struct GuardParams {
  double eps_alpha = 0.1;  // degrees, for 1/alpha terms
  double eps_phi = 0.01;   // dimensionless, for 1/collectivity and 1/Q14

  void validate() const {
    if (!(eps_alpha > 0.0)) throw ConfigError("eps_alpha must be positive");
    if (!(eps_phi > 0.0)) throw ConfigError("eps_phi must be positive");
  }
};

struct DimensionWeights {
  double o = 0.04;
  double c = 0.04;
  double e = 0.72;
  double a = 0.08;
  double n = 0.12;

  void validate() const {
    for (const double w : {o, c, e, a, n}) {
      if (!(w > 0.0)) throw ConfigError("dimension weights must be positive");
    }
    if (std::abs(o + c + e + a + n - 1.0) > 1e-9) {
      throw ConfigError("dimension weights must sum to 1");
    }
  }
};

struct ItemResponsesRaw {
  std::array<double, kItemCount> values{};

  [[nodiscard]] double& item(int k) { return values[static_cast<std::size_t>(k - 1)]; }
  [[nodiscard]] double item(int k) const { return values[static_cast<std::size_t>(k - 1)]; }
};

struct ItemResponsesQuantized {
  std::array<int, kItemCount> values{};

  [[nodiscard]] int& item(int k) { return values[static_cast<std::size_t>(k - 1)]; }
  [[nodiscard]] int item(int k) const { return values[static_cast<std::size_t>(k - 1)]; }

  friend bool operator==(const ItemResponsesQuantized&, const ItemResponsesQuantized&) = default;
};

enum class ScoreLevel { individual, video, country };

inline std::string to_string(ScoreLevel level) {
  switch (level) {
    case ScoreLevel::individual: return "individual";
    case ScoreLevel::video: return "video";
    case ScoreLevel::country: return "country";
  }
  throw UsageError("unknown score level");
}

struct OceanScore {
  double o = 0.0;
  double c = 0.0;
  double e = 0.0;
  double a = 0.0;
  double n = 0.0;
  ScoreLevel level = ScoreLevel::individual;

  [[nodiscard]] double dimension(int idx) const {
    switch (idx) {
      case 0: return o;
      case 1: return c;
      case 2: return e;
      case 3: return a;
      case 4: return n;
      default: throw UsageError("dimension index must be 0..4");
    }
  }
};

inline constexpr std::array<const char*, 5> kDimensionNames{"O", "C", "E", "A", "N"};

struct ScoringOptions {
  DimensionWeights weights{};
  // Item 3 appears direct (not reverse-scored) in the extroversion sum even
  // though its wording keys low; true keeps that printed form, false scores
  // it reversed like items 4 to 8.
  bool strict_paper = true;
};

// --- item answering -----------------------------------------------------------

namespace detail {

inline double guarded_reciprocal(double x, double eps) { return 1.0 / std::max(x, eps); }

inline void require_summary_sane(const FeatureSummary& s) {
  const auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (bad(s.mean_speed) || bad(s.mean_angular_variation) || bad(s.std_angular_variation) ||
      bad(s.mean_collectivity) || bad(s.mean_socialization) || bad(s.mean_isolation)) {
    throw ValidationError(
        fmt::format("feature summary for agent {} has a negative or non-finite field", s.agent_id));
  }
}

}  // namespace detail

// Answers the 25 items from one agent's per-video behavioral summary.
// Shorthands: s = mean speed, alpha = mean angular variation (degrees),
// sd = its standard deviation, col = mean collectivity, soc = mean
// socialization, iso = mean isolation.
inline ItemResponsesRaw answer_items(const FeatureSummary& summary, const GuardParams& guards) {
  guards.validate();
  detail::require_summary_sane(summary);
  const double s = summary.mean_speed;
  const double alpha = summary.mean_angular_variation;
  const double sd = summary.std_angular_variation;
  const double col = summary.mean_collectivity;
  const double soc = summary.mean_socialization;
  const double iso = summary.mean_isolation;
  const double inv_alpha = detail::guarded_reciprocal(alpha, guards.eps_alpha);
  const double inv_col = detail::guarded_reciprocal(col, guards.eps_phi);

  ItemResponsesRaw r;
  r.item(1) = s + inv_alpha;
  r.item(2) = alpha;
  for (int k = 3; k <= 8; ++k) r.item(k) = iso;
  r.item(9) = col;
  r.item(10) = col;
  r.item(11) = iso + sd;
  r.item(12) = s + alpha;
  r.item(13) = iso + inv_col;
  r.item(14) = col + soc + inv_alpha;
  r.item(15) = detail::guarded_reciprocal(r.item(14), guards.eps_phi);
  for (int k = 16; k <= 21; ++k) r.item(k) = soc;
  for (int k = 22; k <= 25; ++k) r.item(k) = soc + col;
  return r;
}

// --- quantization and reversal --------------------------------------------------

// Per-video normalization into five uniform levels: each item is scaled by
// the maximum answer any agent of the video gave to it. An all-zero item
// stays at level 0 for everyone.
inline std::vector<ItemResponsesQuantized> quantize_items(
    std::span<const ItemResponsesRaw> per_agent) {
  if (per_agent.empty()) {
    throw InsufficientDataError("quantization needs at least one agent");
  }
  std::array<double, kItemCount> max_raw{};
  for (const ItemResponsesRaw& r : per_agent) {
    for (int k = 0; k < kItemCount; ++k) {
      const double v = r.values[static_cast<std::size_t>(k)];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(
            fmt::format("raw item {} is negative or non-finite; cannot quantize", k + 1));
      }
      max_raw[static_cast<std::size_t>(k)] = std::max(max_raw[static_cast<std::size_t>(k)], v);
    }
  }
  std::vector<ItemResponsesQuantized> out;
  out.reserve(per_agent.size());
  for (const ItemResponsesRaw& r : per_agent) {
    ItemResponsesQuantized q;
    for (int k = 0; k < kItemCount; ++k) {
      const double m = max_raw[static_cast<std::size_t>(k)];
      if (m <= 0.0) {
        q.values[static_cast<std::size_t>(k)] = 0;
      } else {
        const double scaled =
            std::floor(kQuantLevels * r.values[static_cast<std::size_t>(k)] / m);
        q.values[static_cast<std::size_t>(k)] =
            std::min(kMaxLevel, static_cast<int>(scaled));
      }
    }
    out.push_back(q);
  }
  return out;
}

inline ItemResponsesQuantized reverse_items(const ItemResponsesQuantized& q) {
  ItemResponsesQuantized r;
  for (std::size_t k = 0; k < static_cast<std::size_t>(kItemCount); ++k) {
    r.values[k] = kMaxLevel - q.values[k];
  }
  return r;
}

// --- dimension scoring ----------------------------------------------------------

enum class Dimension { O, C, E, A, N };

// Every item feeds exactly one dimension: 2 -> O, 1 -> C, 9 and 10 -> A,
// 13, 24, 25 -> N, and the remaining 18 -> E.
inline std::array<Dimension, kItemCount> item_dimensions() {
  std::array<Dimension, kItemCount> d;
  d.fill(Dimension::E);
  d[1] = Dimension::O;
  d[0] = Dimension::C;
  d[8] = Dimension::A;
  d[9] = Dimension::A;
  d[12] = Dimension::N;
  d[23] = Dimension::N;
  d[24] = Dimension::N;
  return d;
}

inline OceanScore score_dimensions(const ItemResponsesQuantized& q, const ScoringOptions& opt) {
  opt.weights.validate();
  for (const int v : q.values) {
    if (v < 0 || v > kMaxLevel) {
      throw ValidationError(fmt::format("quantized level {} outside 0..{}", v, kMaxLevel));
    }
  }
  const ItemResponsesQuantized rev = reverse_items(q);

  double e_direct = opt.strict_paper ? q.item(3) : 0.0;
  e_direct += q.item(12) + q.item(14);
  for (int k = 16; k <= 23; ++k) e_direct += q.item(k);

  double e_reversed = opt.strict_paper ? 0.0 : rev.item(3);
  for (int k = 4; k <= 8; ++k) e_reversed += rev.item(k);
  e_reversed += rev.item(11) + rev.item(15);

  OceanScore score;
  score.level = ScoreLevel::individual;
  score.o = rev.item(2) / (opt.weights.o * 100.0);
  score.c = q.item(1) / (opt.weights.c * 100.0);
  score.e = (e_direct + e_reversed) / (opt.weights.e * 100.0);
  score.a = (q.item(9) + q.item(10)) / (opt.weights.a * 100.0);
  score.n = (q.item(13) + rev.item(24) + rev.item(25)) / (opt.weights.n * 100.0);
  return score;
}

// --- aggregation ----------------------------------------------------------------

inline OceanScore aggregate_video(std::span<const OceanScore> individuals) {
  if (individuals.empty()) {
    throw InsufficientDataError("a video needs at least one individual score");
  }
  OceanScore mean;
  mean.level = ScoreLevel::video;
  for (const OceanScore& s : individuals) {
    mean.o += s.o;
    mean.c += s.c;
    mean.e += s.e;
    mean.a += s.a;
    mean.n += s.n;
  }
  const double count = static_cast<double>(individuals.size());
  mean.o /= count;
  mean.c /= count;
  mean.e /= count;
  mean.a /= count;
  mean.n /= count;
  return mean;
}

// Unweighted over videos: a crowded clip counts the same as a sparse one.
inline std::map<std::string, OceanScore> aggregate_country(
    const std::map<std::string, std::vector<OceanScore>>& videos_by_country) {
  std::map<std::string, OceanScore> out;
  for (const auto& [country, videos] : videos_by_country) {
    if (videos.empty()) {
      throw InsufficientDataError(fmt::format("country {} has no video scores", country));
    }
    OceanScore s = aggregate_video(videos);
    s.level = ScoreLevel::country;
    out.emplace(country, s);
  }
  return out;
}

// --- output rows ----------------------------------------------------------------

struct ScoreRow {
  ScoreLevel level = ScoreLevel::individual;
  std::string id;       // agent id, video id, or country code
  std::string country;  // owning country (equals id at country level)
  OceanScore score;
};

inline constexpr const char* kScoresCsvHeader = "level,id,country,O,C,E,A,N";

inline std::string scores_to_csv(std::span<const ScoreRow> rows) {
  std::string out = std::string(kScoresCsvHeader) + "\n";
  for (const ScoreRow& r : rows) {
    out += fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", to_string(r.level), r.id,
                       r.country, r.score.o, r.score.c, r.score.e, r.score.a, r.score.n);
  }
  return out;
}

inline nlohmann::json score_row_to_json(const ScoreRow& r) {
  return {{"level", to_string(r.level)}, {"id", r.id},       {"country", r.country},
          {"O", r.score.o},             {"C", r.score.c},   {"E", r.score.e},
          {"A", r.score.a},             {"N", r.score.n}};
}

inline std::string scores_to_json(std::span<const ScoreRow> rows) {
  nlohmann::json j;
  j["scores"] = nlohmann::json::array();
  for (const ScoreRow& r : rows) j["scores"].push_back(score_row_to_json(r));
  return j.dump(2) + "\n";
}

}  // namespace crowdocean
