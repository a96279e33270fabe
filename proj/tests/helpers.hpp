#pragma once

// Small builders shared across the test suite.

#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"

namespace crowdocean::testing {

struct ObsSpec {
  FrameIndex frame;
  double x;
  double y;
};

inline VideoClip make_clip(
    std::initializer_list<std::pair<AgentId, std::vector<ObsSpec>>> agents,
    std::string video_id = "clip", std::string country = "ZZ", double fps = 25.0,
    double scale = 1.0) {
  VideoClip clip;
  clip.video_id = std::move(video_id);
  clip.country = std::move(country);
  clip.fps = fps;
  clip.scale_m_per_unit = scale;
  for (const auto& [agent, obs] : agents) {
    for (const ObsSpec& o : obs) {
      clip.trajectories[agent].push_back({o.frame, {o.x, o.y}});
    }
  }
  return clip;
}

// Constant-velocity trajectory: `frames` observations starting at `start`,
// moving along `heading_deg` at `speed` meters per frame.
inline std::vector<ObsSpec> straight_line(Vec2 start, double heading_degrees, double speed,
                                          int frames, FrameIndex first_frame = 0) {
  std::vector<ObsSpec> obs;
  const double rad = heading_degrees * kRadPerDeg;
  for (int t = 0; t < frames; ++t) {
    obs.push_back({first_frame + t, start.x + speed * t * std::cos(rad),
                   start.y + speed * t * std::sin(rad)});
  }
  return obs;
}

}  // namespace crowdocean::testing
