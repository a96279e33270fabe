#pragma once

// Per-agent per-frame features: kinematics (speed, heading, angular
// variation), neighborhood statistics over Hall's 3.6 m social space,
// pairwise motion affinity and its collectivity aggregate, the
// proxemics-based socialization ground truth, and the per-video summary.

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"

namespace crowdocean {

struct KinematicState {
  double speed = 0.0;                  // meters/frame
  double heading_deg = 0.0;            // direction of motion w.r.t. (1,0), [0,360)
  double angular_variation_deg = 0.0;  // |heading change| since previous frame, [0,180]
};

struct NeighborhoodStats {
  int n_social = 0;           // agents within the social-space radius
  double mean_distance = 0.0; // mean distance to all other agents in frame; 0 if alone
  int frame_population = 0;   // all agents in the frame, including the queried one
};

// Decay-kernel parameters for pairwise collectivity. The affinity of a pair
// is |speed difference|*w1 + heading gap in radians * w2, clamped to
// pair_cap; each pair then contributes gamma * exp(-beta * affinity^2).
struct CollectivityParams {
  double gamma = 1.0;
  double beta = 0.3;
  double w1 = 1.0;
  double w2 = 1.0;
  double pair_cap = 4.34;

  void validate() const {
    if (!(gamma > 0.0 && beta > 0.0 && w1 > 0.0 && w2 > 0.0 && pair_cap > 0.0)) {
      throw ConfigError("collectivity parameters must all be positive");
    }
  }
};

struct FeatureParams {
  double social_radius = kSocialSpaceRadius;
  CollectivityParams collectivity{};

  void validate() const {
    if (!(social_radius > 0.0)) throw ConfigError("social radius must be positive");
    collectivity.validate();
  }
};

struct FeatureFrame {
  AgentId agent_id = 0;
  FrameIndex frame = 0;
  KinematicState kinematics;
  NeighborhoodStats neighborhood;
  double collectivity = 0.0;     // in [0,1]
  double gt_social_level = 0.0;  // proxemics ground truth, in [0,1)
};

// Per-video average of an agent's features. mean_socialization is filled by
// the classifier, not by the ground-truth rule; mean_isolation is its exact
// complement.
struct FeatureSummary {
  AgentId agent_id = 0;
  double mean_speed = 0.0;
  double mean_angular_variation = 0.0;
  double std_angular_variation = 0.0;  // population standard deviation
  double mean_collectivity = 0.0;
  double mean_socialization = 0.0;
  double mean_isolation = 0.0;
  std::size_t frame_count = 0;
};

// --- kinematics -------------------------------------------------------------

// Kinematics start at the second observation (a displacement is needed) and
// angular variation starts at the third (two displacements); the second
// frame carries angular_variation = 0 by convention. A zero displacement
// keeps the previous heading and contributes zero angular variation, so
// momentarily stationary pedestrians never produce undefined angles. Frame
// gaps divide the displacement, keeping speed in meters/frame.
inline std::vector<std::pair<FrameIndex, KinematicState>> compute_kinematics(
    std::span<const FrameObservation> trajectory) {
  if (trajectory.size() < kMinObservationsPerAgent) {
    throw InsufficientDataError(fmt::format(
        "kinematics need at least {} observations, got {}",
        kMinObservationsPerAgent, trajectory.size()));
  }
  std::vector<std::pair<FrameIndex, KinematicState>> out;
  out.reserve(trajectory.size() - 1);
  double prev_heading = 0.0;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const Vec2 d = trajectory[i].position - trajectory[i - 1].position;
    const auto gap = static_cast<double>(trajectory[i].frame - trajectory[i - 1].frame);
    KinematicState k;
    k.speed = d.norm() / gap;
    if (d.norm() > 0.0) {
      k.heading_deg = heading_deg(d);
      k.angular_variation_deg = i == 1 ? 0.0 : angle_gap_deg(k.heading_deg, prev_heading);
    } else {
      k.heading_deg = prev_heading;
      k.angular_variation_deg = 0.0;
    }
    prev_heading = k.heading_deg;
    out.emplace_back(trajectory[i].frame, k);
  }
  return out;
}

// --- per-frame view ---------------------------------------------------------

// Everyone present in one frame, ascending agent id. Kinematics are absent
// for an agent's first observation; such agents still count for population
// and distances but cannot contribute motion affinity.
struct FrameAgentState {
  AgentId agent_id = 0;
  Vec2 position;
  std::optional<KinematicState> kinematics;
};

using FrameSnapshot = std::vector<FrameAgentState>;

inline std::map<FrameIndex, FrameSnapshot> build_frame_snapshots(const VideoClip& clip) {
  std::map<FrameIndex, FrameSnapshot> snapshots;
  for (const auto& [agent, obs] : clip.trajectories) {
    for (const FrameObservation& o : obs) {
      snapshots[o.frame].push_back({agent, o.position, std::nullopt});
    }
    if (obs.size() >= kMinObservationsPerAgent) {
      for (const auto& [frame, kin] : compute_kinematics(obs)) {
        FrameSnapshot& snap = snapshots[frame];
        const auto it = std::find_if(snap.begin(), snap.end(), [a = agent](const FrameAgentState& s) {
          return s.agent_id == a;
        });
        it->kinematics = kin;
      }
    }
  }
  // Map iteration already visits agents in ascending order per frame.
  return snapshots;
}

namespace detail {

inline const FrameAgentState& find_agent(const FrameSnapshot& snapshot, AgentId agent) {
  const auto it = std::find_if(snapshot.begin(), snapshot.end(), [agent](const FrameAgentState& s) {
    return s.agent_id == agent;
  });
  if (it == snapshot.end()) {
    throw ValidationError(fmt::format("agent {} is not present in the frame", agent));
  }
  return *it;
}

}  // namespace detail

// --- neighborhood -----------------------------------------------------------

// The social-space count is boundary-inclusive; the mean distance runs over
// all other agents in the frame, not only the social space.
inline NeighborhoodStats neighborhood(const FrameSnapshot& snapshot, AgentId agent,
                                      double radius = kSocialSpaceRadius) {
  const FrameAgentState& self = detail::find_agent(snapshot, agent);
  NeighborhoodStats stats;
  stats.frame_population = static_cast<int>(snapshot.size());
  double sum = 0.0;
  for (const FrameAgentState& other : snapshot) {
    if (other.agent_id == agent) continue;
    const double d = distance(self.position, other.position);
    sum += d;
    if (d <= radius) ++stats.n_social;
  }
  if (stats.frame_population > 1) {
    stats.mean_distance = sum / static_cast<double>(stats.frame_population - 1);
  }
  return stats;
}

inline NeighborhoodStats neighborhood(const VideoClip& clip, FrameIndex frame, AgentId agent,
                                      double radius = kSocialSpaceRadius) {
  const auto snapshots = build_frame_snapshots(clip);
  const auto it = snapshots.find(frame);
  if (it == snapshots.end()) {
    throw ValidationError(fmt::format("frame {} is not present in clip '{}'", frame, clip.video_id));
  }
  return neighborhood(it->second, agent, radius);
}

// --- collectivity -----------------------------------------------------------

// Motion affinity of a pair: speed difference plus smallest heading gap in
// radians, clamped to pair_cap. Symmetric in its arguments.
inline double pair_affinity(const KinematicState& a, const KinematicState& b,
                            const CollectivityParams& params = {}) {
  const double speed_term = std::fabs(a.speed - b.speed) * params.w1;
  const double angle_term = angle_gap_deg(a.heading_deg, b.heading_deg) * kRadPerDeg * params.w2;
  return std::min(params.pair_cap, speed_term + angle_term);
}

// Mean decay-kernel affinity over the social-space neighbors that have
// defined kinematics; 0 with no such neighbor. The mean (rather than the
// bare sum) keeps the value inside [0,1] with gamma = 1.
inline double collectivity(const FrameSnapshot& snapshot, AgentId agent,
                           double radius = kSocialSpaceRadius,
                           const CollectivityParams& params = {}) {
  const FrameAgentState& self = detail::find_agent(snapshot, agent);
  if (!self.kinematics) {
    throw ValidationError(fmt::format("agent {} has no kinematics in this frame", agent));
  }
  double sum = 0.0;
  int neighbors = 0;
  for (const FrameAgentState& other : snapshot) {
    if (other.agent_id == agent || !other.kinematics) continue;
    if (distance(self.position, other.position) > radius) continue;
    const double w = pair_affinity(*self.kinematics, *other.kinematics, params);
    sum += params.gamma * std::exp(-params.beta * w * w);
    ++neighbors;
  }
  return neighbors == 0 ? 0.0 : sum / static_cast<double>(neighbors);
}

inline double collectivity(const VideoClip& clip, FrameIndex frame, AgentId agent,
                           const FeatureParams& params = {}) {
  const auto snapshots = build_frame_snapshots(clip);
  const auto it = snapshots.find(frame);
  if (it == snapshots.end()) {
    throw ValidationError(fmt::format("frame {} is not present in clip '{}'", frame, clip.video_id));
  }
  return collectivity(it->second, agent, params.social_radius, params.collectivity);
}

// --- socialization ground truth ----------------------------------------------

struct SocializationGroundTruth {
  double level = 0.0;  // 0 when nobody is in the social space, else n/population
  bool social = false; // level >= 0.5
};

inline SocializationGroundTruth gt_socialization(const NeighborhoodStats& stats) {
  if (stats.frame_population < 1) {
    throw ValidationError("frame population must be at least 1");
  }
  SocializationGroundTruth gt;
  if (stats.n_social > 0) {
    gt.level = static_cast<double>(stats.n_social) / static_cast<double>(stats.frame_population);
  }
  gt.social = gt.level >= 0.5;
  return gt;
}

// --- clip-level driver --------------------------------------------------------

// Feature frames for every agent, from its second observation onward.
inline std::map<AgentId, std::vector<FeatureFrame>> compute_feature_frames(
    const VideoClip& clip, const FeatureParams& params = {}) {
  params.validate();
  const auto snapshots = build_frame_snapshots(clip);
  std::map<AgentId, std::vector<FeatureFrame>> result;
  for (const auto& [agent, obs] : clip.trajectories) {
    if (obs.size() < kMinObservationsPerAgent) {
      throw InsufficientDataError(fmt::format(
          "agent {} has {} observations; validate the clip first", agent, obs.size()));
    }
    std::vector<FeatureFrame>& frames = result[agent];
    frames.reserve(obs.size() - 1);
    for (const auto& [frame, kin] : compute_kinematics(obs)) {
      const FrameSnapshot& snap = snapshots.at(frame);
      FeatureFrame ff;
      ff.agent_id = agent;
      ff.frame = frame;
      ff.kinematics = kin;
      ff.neighborhood = neighborhood(snap, agent, params.social_radius);
      ff.collectivity = collectivity(snap, agent, params.social_radius, params.collectivity);
      ff.gt_social_level = gt_socialization(ff.neighborhood).level;
      frames.push_back(ff);
    }
  }
  return result;
}

// --- summary ------------------------------------------------------------------

// Arithmetic means over the agent's frames plus the population standard
// deviation of angular variation. The socialization sequence comes from the
// classifier, one value per frame.
inline FeatureSummary summarize(std::span<const FeatureFrame> frames,
                                std::span<const double> socialization) {
  if (frames.empty()) {
    throw InsufficientDataError("cannot summarize an empty feature sequence");
  }
  if (frames.size() != socialization.size()) {
    throw UsageError(fmt::format("feature frames ({}) and socialization values ({}) differ in length",
                                 frames.size(), socialization.size()));
  }
  FeatureSummary s;
  s.agent_id = frames.front().agent_id;
  s.frame_count = frames.size();
  const double n = static_cast<double>(frames.size());
  double ang_sq = 0.0;
  for (const FeatureFrame& f : frames) {
    s.mean_speed += f.kinematics.speed;
    s.mean_angular_variation += f.kinematics.angular_variation_deg;
    ang_sq += f.kinematics.angular_variation_deg * f.kinematics.angular_variation_deg;
    s.mean_collectivity += f.collectivity;
  }
  for (const double v : socialization) s.mean_socialization += v;
  s.mean_speed /= n;
  s.mean_angular_variation /= n;
  s.mean_collectivity /= n;
  s.mean_socialization /= n;
  s.mean_isolation = 1.0 - s.mean_socialization;
  const double var = std::max(0.0, ang_sq / n - s.mean_angular_variation * s.mean_angular_variation);
  s.std_angular_variation = std::sqrt(var);
  return s;
}

// --- diagnostics dump ---------------------------------------------------------

inline constexpr std::string_view kFeatureDumpHeader =
    "video_id,agent_id,frame,speed,heading_deg,ang_var_deg,n_social,mean_dist,collectivity,gt_social";

inline std::string feature_dump_rows(const std::string& video_id,
                                     const std::map<AgentId, std::vector<FeatureFrame>>& frames) {
  std::string rows;
  for (const auto& [agent, seq] : frames) {
    for (const FeatureFrame& f : seq) {
      rows += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{},{:.6f},{:.6f},{:.6f}\n",
                          video_id, agent, f.frame, f.kinematics.speed,
                          f.kinematics.heading_deg, f.kinematics.angular_variation_deg,
                          f.neighborhood.n_social, f.neighborhood.mean_distance,
                          f.collectivity, f.gt_social_level);
    }
  }
  return rows;
}

inline void write_feature_dump(std::ostream& out, const std::string& video_id,
                               const std::map<AgentId, std::vector<FeatureFrame>>& frames) {
  out << kFeatureDumpHeader << '\n' << feature_dump_rows(video_id, frames);
}

}  // namespace crowdocean
