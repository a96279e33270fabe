// Command-line front end: generate synthetic clips, train the socialization
// classifier, analyze tracked clips into OCEAN scores, and compare country
// scores against literature baselines. `pipeline` chains all of it.
//
// Exit codes: 0 success, 1 usage or configuration problem, 2 data
// validation failure, 3 training or other runtime failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdocean/crowdocean.hpp"

namespace {

namespace fs = std::filesystem;
using namespace crowdocean;

// Flag values layered over an optional config file; a flag wins only when
// the user actually passed it.
struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool strict_paper = true;
  std::size_t samples = 16000;
  bool dump_features = false;
};

void add_common_options(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file (flags override it)");
  cmd->add_option("--seed", flags.seed, "deterministic seed");
  cmd->add_option("--jobs", flags.jobs, "parallel clip workers");
  cmd->add_option("--strict-paper", flags.strict_paper,
                  "keep item 3 direct in the extroversion sum (true) or reverse it (false)");
}

PipelineConfig resolve_config(const CLI::App* cmd, const CommonFlags& flags) {
  PipelineConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path);
  const auto passed = [cmd](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (passed("--seed")) cfg.seed = flags.seed;
  if (passed("--jobs")) cfg.jobs = flags.jobs;
  if (passed("--strict-paper")) cfg.strict_paper = flags.strict_paper;
  if (passed("--samples")) cfg.training_samples = flags.samples;
  if (passed("--dump-features")) cfg.dump_features = flags.dump_features;
  cfg.validate();
  return cfg;
}

fs::path resolve_out_dir(const CLI::App* cmd, const std::string& flag_value,
                         const PipelineConfig& cfg) {
  const CLI::Option* opt = cmd->get_option_no_throw("--out");
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  return flag_value;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void print_train_report(const TrainOutcome& outcome) {
  const TrainReport& r = outcome.report;
  std::cout << "training finished: iterations=" << r.iterations
            << " final_loss=" << r.final_loss << " gradient_norm=" << r.gradient_norm
            << " converged=" << (r.converged ? "yes" : "no") << "\n";
  std::cout << "accuracy: train=" << r.train_accuracy
            << " validation=" << r.validation_accuracy << "\n";
  if (r.single_class_warning) {
    std::cerr << "warning: training data holds a single class; the classifier is degenerate\n";
  }
}

MlpWeights train_model(const PipelineConfig& cfg, const std::optional<fs::path>& samples_csv) {
  const auto samples = build_training_samples({cfg.training_samples, cfg.seed});
  if (samples_csv) {
    write_text_file(*samples_csv, training_samples_csv(samples));
    std::cout << "wrote " << samples_csv->string() << "\n";
  }
  const TrainOutcome outcome = scg_train(samples, cfg.train_config());
  print_train_report(outcome);
  return outcome.model;
}

std::optional<BaselineSet> maybe_load_baselines(const std::string& flag_path,
                                                const PipelineConfig& cfg) {
  std::string path = flag_path.empty() ? cfg.baselines_path : flag_path;
  if (path.empty()) return std::nullopt;
  return load_baselines_file(path);
}

void run_and_write(const std::vector<VideoClip>& clips, const MlpWeights& model,
                   const PipelineConfig& cfg, const std::optional<BaselineSet>& baselines,
                   const fs::path& out_dir) {
  const CorpusAnalysis corpus = analyze_corpus(clips, model, cfg);
  const PipelineArtifacts artifacts = build_artifacts(corpus, baselines, cfg);
  write_artifacts(artifacts, out_dir);
  std::size_t individuals = 0;
  for (const VideoAnalysis& v : corpus.videos) individuals += v.individuals.size();
  std::cout << "analyzed " << corpus.videos.size() << " clip(s), " << individuals
            << " individual(s), " << corpus.country_scores.size() << " country(ies)\n";
  std::cout << "artifacts written to " << out_dir.string() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Pedestrian trajectories to Big Five personality scores"};
  app.require_subcommand(1);

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "generate one synthetic clip");
  std::string kind_name = "coherent_group";
  ScenarioSpec spec;
  std::string synth_out = ".";
  synth->add_option("--kind", kind_name,
                    "coherent_group | random_walk | lone_among_crowd | mixed");
  synth->add_option("--agents", spec.agent_count, "number of agents");
  synth->add_option("--frames", spec.frames, "number of frames");
  synth->add_option("--speed", spec.base_speed, "meters per frame");
  synth->add_option("--spacing", spec.spacing, "group diameter / grid pitch in meters");
  synth->add_option("--jitter", spec.heading_jitter_deg, "heading noise stddev in degrees");
  synth->add_option("--seed", spec.seed, "deterministic seed");
  synth->add_option("--video-id", spec.video_id, "clip identifier");
  synth->add_option("--country", spec.country, "ISO 3166 alpha-2 country tag");
  synth->add_option("--fps", spec.fps, "frames per second");
  synth->add_option("--out", synth_out, "output directory");

  // --- train ---
  auto* train = app.add_subcommand("train", "train the socialization classifier");
  CommonFlags train_flags;
  add_common_options(train, train_flags);
  train->add_option("--samples", train_flags.samples, "training set size");
  std::string train_out = "model.json";
  std::string train_samples_csv;
  train->add_option("--out", train_out, "model output path");
  train->add_option("--samples-csv", train_samples_csv, "also dump the training set as CSV");

  // --- analyze ---
  auto* analyze = app.add_subcommand("analyze", "score tracked clips");
  CommonFlags analyze_flags;
  add_common_options(analyze, analyze_flags);
  analyze->add_flag("--dump-features", analyze_flags.dump_features,
                    "also write per-frame features.csv");
  std::string analyze_model;
  std::string analyze_baselines;
  std::string analyze_out = "out";
  std::vector<std::string> analyze_clips;
  analyze->add_option("--model", analyze_model, "trained model JSON (or 'model' config key)");
  analyze->add_option("--baselines", analyze_baselines, "literature baseline CSV");
  analyze->add_option("--out", analyze_out, "output directory");
  analyze->add_option("clips", analyze_clips, "trajectory CSV files")->required();

  // --- compare ---
  auto* compare = app.add_subcommand("compare", "compare scores against baselines");
  std::string compare_scores;
  std::string compare_baselines;
  std::string compare_out = "out";
  compare->add_option("--scores", compare_scores, "scores.json from analyze/pipeline")
      ->required();
  compare->add_option("--baselines", compare_baselines, "literature baseline CSV")->required();
  compare->add_option("--out", compare_out, "output directory");

  // --- pipeline ---
  auto* pipeline = app.add_subcommand(
      "pipeline", "train on synthetic data, analyze the demo corpus, compare");
  CommonFlags pipeline_flags;
  add_common_options(pipeline, pipeline_flags);
  pipeline->add_option("--samples", pipeline_flags.samples, "training set size");
  pipeline->add_flag("--dump-features", pipeline_flags.dump_features,
                     "also write per-frame features.csv");
  std::string pipeline_baselines;
  std::string pipeline_out = "out";
  pipeline->add_option("--baselines", pipeline_baselines, "literature baseline CSV");
  pipeline->add_option("--out", pipeline_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    spec.kind = scenario_kind_from_string(kind_name);
    const VideoClip clip = generate(spec);
    write_clip_files(clip, synth_out);
    std::cout << "wrote " << (fs::path(synth_out) / (clip.video_id + ".csv")).string()
              << " and its metadata sidecar\n";
    return 0;
  }

  if (train->parsed()) {
    const PipelineConfig cfg = resolve_config(train, train_flags);
    std::optional<fs::path> samples_csv;
    if (!train_samples_csv.empty()) samples_csv = train_samples_csv;
    const MlpWeights model = train_model(cfg, samples_csv);
    write_text_file(train_out, save_model(model));
    std::cout << "wrote " << train_out << "\n";
    return 0;
  }

  if (analyze->parsed()) {
    const PipelineConfig cfg = resolve_config(analyze, analyze_flags);
    const std::string model_path =
        !analyze_model.empty() ? analyze_model : cfg.model_path;
    if (model_path.empty()) {
      throw UsageError("no model given; pass --model or set 'model' in the config file");
    }
    const MlpWeights model = load_model_file(model_path);
    std::vector<VideoClip> clips;
    clips.reserve(analyze_clips.size());
    for (const std::string& path : analyze_clips) clips.push_back(load_clip_file(path));
    run_and_write(clips, model, cfg, maybe_load_baselines(analyze_baselines, cfg),
                  resolve_out_dir(analyze, analyze_out, cfg));
    return 0;
  }

  if (compare->parsed()) {
    const auto rows = load_scores_json(read_text_file(compare_scores));
    std::vector<ScoreRow> country_rows;
    for (const ScoreRow& r : rows) {
      if (r.level == ScoreLevel::country) country_rows.push_back(r);
    }
    if (country_rows.empty()) {
      throw ValidationError("scores file holds no country-level rows");
    }
    const BaselineSet baselines = load_baselines_file(compare_baselines);
    const ErrorReport report = build_error_report(country_rows, baselines);
    const ReportArtifacts artifacts = emit_report(report, country_rows);
    fs::create_directories(compare_out);
    write_text_file(fs::path(compare_out) / "report.json", artifacts.report_json);
    write_text_file(fs::path(compare_out) / "plot_series.csv", artifacts.plot_series_csv);
    std::cout << "compared " << report.compared.size() << " country(ies); report written to "
              << compare_out << "\n";
    return 0;
  }

  // pipeline
  const PipelineConfig cfg = resolve_config(pipeline, pipeline_flags);
  const fs::path out_dir = resolve_out_dir(pipeline, pipeline_out, cfg);
  fs::create_directories(out_dir);

  const MlpWeights model = train_model(cfg, std::nullopt);
  write_text_file(out_dir / "model.json", save_model(model));

  std::vector<VideoClip> clips;
  const fs::path clips_dir = out_dir / "clips";
  for (const ScenarioSpec& scenario : demo_corpus(cfg.seed)) {
    clips.push_back(generate(scenario));
    write_clip_files(clips.back(), clips_dir);
  }
  run_and_write(clips, model, cfg, maybe_load_baselines(pipeline_baselines, cfg), out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const crowdocean::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
