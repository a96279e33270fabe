#pragma once

// End-to-end wiring: load clips, extract features, predict socialization
// with a trained model, answer and quantize the questionnaire, score OCEAN
// per individual / video / country, and compare against literature
// baselines. Everything here is deterministic for fixed inputs: clips are
// processed in sorted order, worker results merge by index, and artifact
// bytes contain no timestamps.

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crowdocean/baselines.hpp"
#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"
#include "crowdocean/features.hpp"
#include "crowdocean/mlp.hpp"
#include "crowdocean/ocean.hpp"
#include "crowdocean/scg.hpp"
#include "crowdocean/synth.hpp"
#include "crowdocean/trajectory_io.hpp"

namespace crowdocean {

struct PipelineConfig {
  double social_radius = kSocialSpaceRadius;
  CollectivityParams collectivity{};
  GuardParams guards{};
  bool strict_paper = true;
  std::uint64_t seed = 0;
  FrameIndex gap_threshold = kDefaultGapThreshold;
  int jobs = 1;
  bool dump_features = false;
  TrainConfig training{};
  std::size_t training_samples = 16000;
  std::string model_path;
  std::string baselines_path;
  std::string out_dir;

  void validate() const {
    if (!(social_radius > 0.0)) throw ConfigError("social_radius must be positive");
    collectivity.validate();
    guards.validate();
    if (gap_threshold < 1) throw ConfigError("gap_threshold must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (training_samples < 10) throw ConfigError("training_samples must be at least 10");
    training.validate();
  }

  [[nodiscard]] FeatureParams feature_params() const {
    return {social_radius, collectivity};
  }

  [[nodiscard]] ScoringOptions scoring_options() const {
    ScoringOptions opt;
    opt.strict_paper = strict_paper;
    return opt;
  }

  [[nodiscard]] TrainConfig train_config() const {
    TrainConfig t = training;
    t.seed = seed;
    return t;
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const char* scope) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError(fmt::format("unknown config key '{}' in {}", key, scope));
    }
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
  }
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"social_radius", "collectivity", "guards", "strict_paper", "seed", "gap_threshold",
       "jobs", "dump_features", "training", "training_samples", "model", "baselines", "out"},
      "config root");
  PipelineConfig cfg;
  detail::read_key(j, "social_radius", cfg.social_radius);
  if (j.contains("collectivity")) {
    const auto& c = j.at("collectivity");
    detail::reject_unknown_keys(c, {"gamma", "beta", "w1", "w2", "pair_cap"}, "collectivity");
    detail::read_key(c, "gamma", cfg.collectivity.gamma);
    detail::read_key(c, "beta", cfg.collectivity.beta);
    detail::read_key(c, "w1", cfg.collectivity.w1);
    detail::read_key(c, "w2", cfg.collectivity.w2);
    detail::read_key(c, "pair_cap", cfg.collectivity.pair_cap);
  }
  if (j.contains("guards")) {
    const auto& g = j.at("guards");
    detail::reject_unknown_keys(g, {"eps_alpha", "eps_phi"}, "guards");
    detail::read_key(g, "eps_alpha", cfg.guards.eps_alpha);
    detail::read_key(g, "eps_phi", cfg.guards.eps_phi);
  }
  detail::read_key(j, "strict_paper", cfg.strict_paper);
  detail::read_key(j, "seed", cfg.seed);
  detail::read_key(j, "gap_threshold", cfg.gap_threshold);
  detail::read_key(j, "jobs", cfg.jobs);
  detail::read_key(j, "dump_features", cfg.dump_features);
  if (j.contains("training")) {
    const auto& t = j.at("training");
    detail::reject_unknown_keys(
        t, {"max_iterations", "gradient_tolerance", "sigma0", "lambda0", "split_fraction"},
        "training");
    detail::read_key(t, "max_iterations", cfg.training.max_iterations);
    detail::read_key(t, "gradient_tolerance", cfg.training.gradient_tolerance);
    detail::read_key(t, "sigma0", cfg.training.sigma0);
    detail::read_key(t, "lambda0", cfg.training.lambda0);
    detail::read_key(t, "split_fraction", cfg.training.split_fraction);
  }
  detail::read_key(j, "training_samples", cfg.training_samples);
  detail::read_key(j, "model", cfg.model_path);
  detail::read_key(j, "baselines", cfg.baselines_path);
  detail::read_key(j, "out", cfg.out_dir);
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config file '{}' is not valid JSON: {}", path.string(),
                                  e.what()));
  }
  return parse_config(j);
}

// --- per-clip analysis ----------------------------------------------------------

struct IndividualResult {
  AgentId agent = 0;
  FeatureSummary summary;
  ItemResponsesRaw raw_items;
  ItemResponsesQuantized quantized;
  OceanScore score;
};

struct VideoAnalysis {
  std::string video_id;
  std::string country;
  std::vector<IndividualResult> individuals;  // ascending agent id
  OceanScore video_score;
  DropReport drops;
  std::map<AgentId, std::vector<FeatureFrame>> feature_frames;
};

namespace detail {

template <typename Fn>
auto with_clip_context(const std::string& clip_name, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const InsufficientDataError& e) {
    throw InsufficientDataError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const UsageError& e) {
    throw UsageError(fmt::format("clip '{}': {}", clip_name, e.what()));
  } catch (const TrainingError& e) {
    throw TrainingError(fmt::format("clip '{}': {}", clip_name, e.what()));
  }
}

}  // namespace detail

inline VideoAnalysis analyze_clip(const VideoClip& raw, const MlpWeights& model,
                                  const PipelineConfig& cfg) {
  return detail::with_clip_context(raw.video_id, [&] {
    cfg.validate();
    if (!model.meta.trained) {
      throw UsageError("model has not been trained; train or load a trained model first");
    }
    VideoClip metered = scale_to_meters(raw);
    ValidatedClip valid = validate_clip(metered, cfg.gap_threshold);

    VideoAnalysis out;
    out.video_id = valid.clip.video_id;
    out.country = valid.clip.country;
    out.drops = valid.report;
    out.feature_frames = compute_feature_frames(valid.clip, cfg.feature_params());

    std::vector<ItemResponsesRaw> raw_items;
    for (const auto& [agent, frames] : out.feature_frames) {
      IndividualResult ind;
      ind.agent = agent;
      std::vector<double> socialization;
      socialization.reserve(frames.size());
      for (const FeatureFrame& f : frames) {
        socialization.push_back(predict_socialization(
            model, {f.collectivity, f.neighborhood.mean_distance,
                    static_cast<double>(f.neighborhood.n_social)}));
      }
      ind.summary = summarize(frames, socialization);
      ind.raw_items = answer_items(ind.summary, cfg.guards);
      raw_items.push_back(ind.raw_items);
      out.individuals.push_back(std::move(ind));
    }

    const auto quantized = quantize_items(raw_items);
    std::vector<OceanScore> individual_scores;
    const ScoringOptions opt = cfg.scoring_options();
    for (std::size_t i = 0; i < out.individuals.size(); ++i) {
      out.individuals[i].quantized = quantized[i];
      out.individuals[i].score = score_dimensions(quantized[i], opt);
      individual_scores.push_back(out.individuals[i].score);
    }
    out.video_score = aggregate_video(individual_scores);
    return out;
  });
}

// --- corpus analysis ------------------------------------------------------------

namespace detail {

// Fixed-stride work sharing; each index's failure is captured and the
// lowest-index failure wins, so errors are as deterministic as results.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> failures(count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < count;
           i += static_cast<std::size_t>(workers)) {
        try {
          fn(i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& p : failures) {
    if (p) std::rethrow_exception(p);
  }
}

}  // namespace detail

struct CorpusAnalysis {
  std::vector<VideoAnalysis> videos;                // sorted by video id
  std::map<std::string, OceanScore> country_scores;
  std::vector<ScoreRow> rows;                       // individuals, then videos, then countries
};

inline std::vector<ScoreRow> build_score_rows(std::span<const VideoAnalysis> videos,
                                              const std::map<std::string, OceanScore>& countries) {
  std::vector<ScoreRow> rows;
  for (const VideoAnalysis& v : videos) {
    for (const IndividualResult& ind : v.individuals) {
      rows.push_back({ScoreLevel::individual, fmt::format("{}:{}", v.video_id, ind.agent),
                      v.country, ind.score});
    }
  }
  for (const VideoAnalysis& v : videos) {
    rows.push_back({ScoreLevel::video, v.video_id, v.country, v.video_score});
  }
  for (const auto& [country, score] : countries) {
    rows.push_back({ScoreLevel::country, country, country, score});
  }
  return rows;
}

inline CorpusAnalysis analyze_corpus(std::vector<VideoClip> clips, const MlpWeights& model,
                                     const PipelineConfig& cfg) {
  cfg.validate();
  if (clips.empty()) throw InsufficientDataError("no clips to analyze");
  std::sort(clips.begin(), clips.end(),
            [](const VideoClip& a, const VideoClip& b) { return a.video_id < b.video_id; });
  for (std::size_t i = 1; i < clips.size(); ++i) {
    if (clips[i].video_id == clips[i - 1].video_id) {
      throw ValidationError(fmt::format("duplicate video id '{}'", clips[i].video_id));
    }
  }

  CorpusAnalysis out;
  out.videos.resize(clips.size());
  detail::parallel_for(clips.size(), cfg.jobs,
                       [&](std::size_t i) { out.videos[i] = analyze_clip(clips[i], model, cfg); });

  std::map<std::string, std::vector<OceanScore>> by_country;
  for (const VideoAnalysis& v : out.videos) by_country[v.country].push_back(v.video_score);
  out.country_scores = aggregate_country(by_country);
  out.rows = build_score_rows(out.videos, out.country_scores);
  return out;
}

// --- artifacts ------------------------------------------------------------------

struct PipelineArtifacts {
  std::string scores_csv;
  std::string scores_json;
  std::string report_json;
  std::string plot_series_csv;
  std::string drop_report_json;
  std::optional<std::string> features_csv;
};

inline nlohmann::json drop_reports_to_json(std::span<const VideoAnalysis> videos) {
  nlohmann::json j;
  j["videos"] = nlohmann::json::array();
  for (const VideoAnalysis& v : videos) {
    nlohmann::json entry;
    entry["video_id"] = v.video_id;
    entry["drops"] = nlohmann::json::array();
    for (const DropRecord& d : v.drops.drops) {
      entry["drops"].push_back({{"agent_id", d.agent_id}, {"reason", d.reason}});
    }
    j["videos"].push_back(std::move(entry));
  }
  return j;
}

inline PipelineArtifacts build_artifacts(const CorpusAnalysis& corpus,
                                         const std::optional<BaselineSet>& baselines,
                                         const PipelineConfig& cfg) {
  PipelineArtifacts art;
  art.scores_csv = scores_to_csv(corpus.rows);
  art.scores_json = scores_to_json(corpus.rows);

  std::vector<ScoreRow> country_rows;
  for (const ScoreRow& r : corpus.rows) {
    if (r.level == ScoreLevel::country) country_rows.push_back(r);
  }
  const ErrorReport report = build_error_report(country_rows, baselines.value_or(BaselineSet{}));
  const ReportArtifacts reports = emit_report(report, country_rows);
  art.report_json = reports.report_json;
  art.plot_series_csv = reports.plot_series_csv;
  art.drop_report_json = drop_reports_to_json(corpus.videos).dump(2) + "\n";

  if (cfg.dump_features) {
    std::string csv = std::string(kFeatureDumpHeader) + "\n";
    for (const VideoAnalysis& v : corpus.videos) {
      csv += feature_dump_rows(v.video_id, v.feature_frames);
    }
    art.features_csv = std::move(csv);
  }
  return art;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

inline void write_artifacts(const PipelineArtifacts& art, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "scores.csv", art.scores_csv);
  write_text_file(dir / "scores.json", art.scores_json);
  write_text_file(dir / "report.json", art.report_json);
  write_text_file(dir / "plot_series.csv", art.plot_series_csv);
  write_text_file(dir / "drop_report.json", art.drop_report_json);
  if (art.features_csv) write_text_file(dir / "features.csv", *art.features_csv);
}

// --- loading scores back (compare subcommand) ------------------------------------

inline std::vector<ScoreRow> load_scores_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("scores file is not valid JSON: {}", e.what()));
  }
  try {
    std::vector<ScoreRow> rows;
    for (const auto& entry : j.at("scores")) {
      ScoreRow r;
      const std::string level = entry.at("level").get<std::string>();
      if (level == "individual") r.level = ScoreLevel::individual;
      else if (level == "video") r.level = ScoreLevel::video;
      else if (level == "country") r.level = ScoreLevel::country;
      else throw FormatError(fmt::format("unknown score level '{}'", level));
      r.id = entry.at("id").get<std::string>();
      r.country = entry.at("country").get<std::string>();
      r.score.o = entry.at("O").get<double>();
      r.score.c = entry.at("C").get<double>();
      r.score.e = entry.at("E").get<double>();
      r.score.a = entry.at("A").get<double>();
      r.score.n = entry.at("N").get<double>();
      r.score.level = r.level;
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("scores file is structurally invalid: {}", e.what()));
  }
}

// --- demonstration corpus ---------------------------------------------------------

// Scenario set the all-in-one pipeline analyzes after training: three
// countries, two clips each, spanning all four scenario kinds.
inline std::vector<ScenarioSpec> demo_corpus(std::uint64_t seed) {
  return {
      {ScenarioKind::coherent_group, 8, 120, 0.05, 2.0, 5.0, seed + 1, "br-plaza-01", "BR", 25.0},
      {ScenarioKind::mixed, 10, 120, 0.07, 2.2, 6.0, seed + 2, "br-market-02", "BR", 25.0},
      {ScenarioKind::random_walk, 8, 120, 0.06, 10.0, 0.0, seed + 3, "cn-station-01", "CN", 25.0},
      {ScenarioKind::lone_among_crowd, 7, 120, 0.05, 2.0, 8.0, seed + 4, "cn-park-02", "CN", 25.0},
      {ScenarioKind::coherent_group, 6, 120, 0.06, 2.5, 8.0, seed + 5, "de-street-01", "DE", 25.0},
      {ScenarioKind::random_walk, 9, 120, 0.08, 3.0, 0.0, seed + 6, "de-plaza-02", "DE", 25.0},
  };
}

}  // namespace crowdocean
