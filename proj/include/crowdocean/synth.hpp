#pragma once

// Synthetic trajectory scenarios. These stand in for a real tracked-video
// corpus: controllable group structure spanning the ground-truth label space
// (tight coherent groups, isolated wanderers, a loner beside a cluster, and
// mixtures) so the classifier sees both classes at varied densities. The
// kinematics are deliberately simple: constant speed, per-frame heading
// rules, no interaction forces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fmt/format.h>
#include <iterator>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"
#include "crowdocean/features.hpp"
#include "crowdocean/mlp.hpp"

namespace crowdocean {

enum class ScenarioKind { coherent_group, random_walk, lone_among_crowd, mixed };

inline std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::coherent_group: return "coherent_group";
    case ScenarioKind::random_walk: return "random_walk";
    case ScenarioKind::lone_among_crowd: return "lone_among_crowd";
    case ScenarioKind::mixed: return "mixed";
  }
  throw UsageError("unknown scenario kind");
}

inline ScenarioKind scenario_kind_from_string(std::string_view name) {
  if (name == "coherent_group") return ScenarioKind::coherent_group;
  if (name == "random_walk") return ScenarioKind::random_walk;
  if (name == "lone_among_crowd") return ScenarioKind::lone_among_crowd;
  if (name == "mixed") return ScenarioKind::mixed;
  throw ConfigError(fmt::format("unknown scenario kind '{}'", name));
}

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::coherent_group;
  int agent_count = 8;
  int frames = 100;
  double base_speed = 0.05;        // meters per frame
  double spacing = 2.0;            // meters; group diameter or walker grid pitch
  double heading_jitter_deg = 0.0; // stddev of per-frame heading noise
  std::uint64_t seed = 0;
  std::string video_id = "synthetic";
  std::string country = "ZZ";
  double fps = 25.0;

  void validate() const {
    if (agent_count < 1) throw ConfigError("agent_count must be at least 1");
    if ((kind == ScenarioKind::lone_among_crowd || kind == ScenarioKind::mixed) &&
        agent_count < 2) {
      throw ConfigError(
          fmt::format("scenario '{}' needs at least 2 agents", to_string(kind)));
    }
    if (frames < 3) throw ConfigError("frames must be at least 3");
    if (!(base_speed >= 0.0)) throw ConfigError("base_speed must be non-negative");
    if (!(spacing > 0.0)) throw ConfigError("spacing must be positive");
    if (!(heading_jitter_deg >= 0.0)) throw ConfigError("heading_jitter must be non-negative");
    if (video_id.empty()) throw ConfigError("video_id must not be empty");
    if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  }
};

namespace detail {

inline Vec2 unit_from_deg(double heading_deg) {
  const double rad = heading_deg * kRadPerDeg;
  return {std::cos(rad), std::sin(rad)};
}

// Agents evenly around a circle whose diameter equals `spacing`, so every
// pairwise distance is at most `spacing`.
inline std::vector<Vec2> ring_positions(int count, double diameter) {
  std::vector<Vec2> pos;
  pos.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    pos.push_back({0.0, 0.0});
    return pos;
  }
  const double radius = diameter / 2.0;
  for (int i = 0; i < count; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / count;
    pos.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  return pos;
}

inline std::vector<Vec2> grid_positions(int count, double pitch, Vec2 origin) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  std::vector<Vec2> pos;
  pos.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    pos.push_back({origin.x + pitch * (i % cols), origin.y + pitch * (i / cols)});
  }
  return pos;
}

// Distance that keeps the lone agent (or a walker block) outside social
// range of a cluster no matter how headings diverge: cluster radius, the
// social radius itself, a meter of slack, and the worst-case relative drift
// of two agents at the same speed.
inline double isolation_offset(const ScenarioSpec& spec) {
  return spec.spacing / 2.0 + kSocialSpaceRadius + 1.0 +
         2.0 * spec.base_speed * static_cast<double>(spec.frames);
}

inline void record_frame(VideoClip& clip, std::span<const Vec2> positions, FrameIndex frame) {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    clip.trajectories[static_cast<AgentId>(i)].push_back({frame, positions[i]});
  }
}

}  // namespace detail

// Deterministic for a fixed spec: one generator seeded from spec.seed, drawn
// in a fixed order (scenario-level headings first, then frame by frame in
// agent-id order).
inline VideoClip generate(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  VideoClip clip;
  clip.video_id = spec.video_id;
  clip.country = spec.country;
  clip.fps = spec.fps;
  clip.scale_m_per_unit = 1.0;

  const int n = spec.agent_count;
  std::vector<Vec2> positions;
  std::vector<bool> walks(static_cast<std::size_t>(n), false);   // resample heading each frame
  std::vector<bool> jitters(static_cast<std::size_t>(n), true);  // apply heading noise
  double common_heading = 0.0;

  switch (spec.kind) {
    case ScenarioKind::coherent_group: {
      common_heading = 360.0 * rng.uniform();
      positions = detail::ring_positions(n, spec.spacing);
      break;
    }
    case ScenarioKind::random_walk: {
      positions = detail::grid_positions(n, spec.spacing, {0.0, 0.0});
      std::fill(walks.begin(), walks.end(), true);
      break;
    }
    case ScenarioKind::lone_among_crowd: {
      common_heading = 360.0 * rng.uniform();
      const double lone_direction = 360.0 * rng.uniform();
      positions = detail::ring_positions(n - 1, spec.spacing);
      const Vec2 lone =
          detail::unit_from_deg(lone_direction) * detail::isolation_offset(spec);
      positions.push_back(lone);
      jitters.back() = false;  // the loner tracks the common heading exactly
      break;
    }
    case ScenarioKind::mixed: {
      common_heading = 360.0 * rng.uniform();
      // The group needs a frame-population majority, or its members would
      // all fall below the 0.5 ground-truth threshold and the clip would
      // carry a single label.
      const int group_n = std::min(n, (n + 3) / 2);
      positions = detail::ring_positions(group_n, spec.spacing);
      const auto walkers = detail::grid_positions(
          n - group_n, spec.spacing, {detail::isolation_offset(spec), 0.0});
      positions.insert(positions.end(), walkers.begin(), walkers.end());
      for (int i = group_n; i < n; ++i) walks[static_cast<std::size_t>(i)] = true;
      break;
    }
  }

  detail::record_frame(clip, positions, 0);
  for (int t = 1; t < spec.frames; ++t) {
    for (int i = 0; i < n; ++i) {
      double heading = common_heading;
      if (walks[static_cast<std::size_t>(i)]) {
        heading = 360.0 * rng.uniform();
      } else if (jitters[static_cast<std::size_t>(i)] && spec.heading_jitter_deg > 0.0) {
        heading += spec.heading_jitter_deg * rng.normal();
      }
      positions[static_cast<std::size_t>(i)] =
          positions[static_cast<std::size_t>(i)] +
          detail::unit_from_deg(heading) * spec.base_speed;
    }
    detail::record_frame(clip, positions, t);
  }
  return clip;
}

// --- training set -----------------------------------------------------------

struct TrainingSetSpec {
  std::size_t sample_count = 16000;
  std::uint64_t seed = 0;
};

// The canonical scenario mix behind the training set: tight and loose
// coherent groups, a ring too sparse for social range, dense and sparse
// wanderers, a loner beside a cluster, and a majority group beside walkers.
// Clip i takes template i mod 7 with a seed derived from the set seed.
inline std::vector<ScenarioSpec> training_mix(std::uint64_t set_seed, std::size_t clip_count) {
  const ScenarioSpec templates[] = {
      {ScenarioKind::coherent_group, 8, 40, 0.05, 2.0, 5.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::coherent_group, 5, 40, 0.08, 2.5, 10.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::coherent_group, 8, 40, 0.05, 12.0, 0.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::random_walk, 9, 40, 0.10, 3.0, 0.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::random_walk, 8, 40, 0.06, 10.0, 0.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::lone_among_crowd, 7, 40, 0.05, 2.0, 8.0, 0, "", "ZZ", 25.0},
      {ScenarioKind::mixed, 10, 40, 0.07, 2.2, 6.0, 0, "", "ZZ", 25.0},
  };
  std::vector<ScenarioSpec> specs;
  specs.reserve(clip_count);
  for (std::size_t i = 0; i < clip_count; ++i) {
    ScenarioSpec s = templates[i % std::size(templates)];
    s.seed = set_seed * 1000003ULL + i;
    s.video_id = fmt::format("train-{:04}", i);
    specs.push_back(std::move(s));
  }
  return specs;
}

// Labeled per-agent per-frame samples, generated clip by clip until the
// requested count is reached. Sample order follows clip order, then agent
// id, then frame, so the set is reproducible byte for byte from its seed.
inline std::vector<TrainingSample> build_training_samples(const TrainingSetSpec& spec) {
  if (spec.sample_count == 0) throw ConfigError("sample_count must be positive");
  std::vector<TrainingSample> samples;
  samples.reserve(spec.sample_count);
  const FeatureParams params;
  std::size_t clip_index = 0;
  while (samples.size() < spec.sample_count) {
    const auto scenario = training_mix(spec.seed, clip_index + 1).back();
    const VideoClip clip = generate(scenario);
    const auto frames_by_agent = compute_feature_frames(clip, params);
    for (const auto& [agent, frames] : frames_by_agent) {
      for (const FeatureFrame& f : frames) {
        if (samples.size() == spec.sample_count) break;
        TrainingSample s;
        s.input = {f.collectivity, f.neighborhood.mean_distance,
                   static_cast<double>(f.neighborhood.n_social)};
        s.social = gt_socialization(f.neighborhood).social;
        samples.push_back(s);
      }
      if (samples.size() == spec.sample_count) break;
    }
    ++clip_index;
  }
  return samples;
}

inline constexpr const char* kTrainingSamplesCsvHeader =
    "collectivity,mean_distance,n_social,social";

inline std::string training_samples_csv(std::span<const TrainingSample> samples) {
  std::string out = std::string(kTrainingSamplesCsvHeader) + "\n";
  for (const TrainingSample& s : samples) {
    out += fmt::format("{},{},{},{}\n", s.input[0], s.input[1], s.input[2], s.social ? 1 : 0);
  }
  return out;
}

}  // namespace crowdocean
