#pragma once

#include <map>
#include <string>
#include <vector>

#include "crowdocean/core.hpp"

namespace crowdocean {

// An agent needs at least three observations before angular variation is
// defined; shorter trajectories carry no usable signal.
inline constexpr std::size_t kMinObservationsPerAgent = 3;

// One tracked position sample. The agent id lives in the enclosing map key.
struct FrameObservation {
  FrameIndex frame = 0;
  Vec2 position;

  friend bool operator==(const FrameObservation&, const FrameObservation&) = default;
};

// All trajectories of one video plus its metadata sidecar. Positions are in
// tracker units until scale_to_meters() has run, after which
// scale_m_per_unit is 1 and positions are meters.
struct VideoClip {
  std::string video_id;
  std::string country;  // ISO 3166 alpha-2, upper case
  double fps = 0.0;
  double scale_m_per_unit = 1.0;
  std::map<AgentId, std::vector<FrameObservation>> trajectories;

  [[nodiscard]] std::size_t agent_count() const { return trajectories.size(); }

  [[nodiscard]] std::size_t observation_count() const {
    std::size_t n = 0;
    for (const auto& [id, obs] : trajectories) n += obs.size();
    return n;
  }

  friend bool operator==(const VideoClip&, const VideoClip&) = default;
};

struct DropRecord {
  AgentId agent_id = 0;
  std::string reason;

  friend bool operator==(const DropRecord&, const DropRecord&) = default;
};

struct DropReport {
  std::vector<DropRecord> drops;

  [[nodiscard]] bool empty() const { return drops.empty(); }
};

}  // namespace crowdocean
