#pragma once

// Ingest of tracker output: a trajectory CSV (`frame,agent_id,x,y`) plus a
// JSON metadata sidecar (`video_id`, `country`, `fps`, `scale_m_per_unit`).
// Validation drops agents too short for angular variation and splits
// trajectories at large frame gaps instead of interpolating across them.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdocean/clip.hpp"
#include "crowdocean/core.hpp"

namespace crowdocean {

inline constexpr std::string_view kTrajectoryCsvHeader = "frame,agent_id,x,y";
inline constexpr FrameIndex kDefaultGapThreshold = 5;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
inline T parse_number(std::string_view field, std::size_t line_no, std::string_view what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(fmt::format("line {}: cannot parse {} from '{}'", line_no, what, field));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ParseError(fmt::format("line {}: non-finite {} '{}'", line_no, what, field));
    }
  }
  return value;
}

}  // namespace detail

// --- metadata sidecar -------------------------------------------------------

inline VideoClip parse_metadata(std::istream& metadata_json) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("metadata sidecar is not valid JSON: {}", e.what()));
  }
  VideoClip clip;
  for (const char* key : {"video_id", "country", "fps", "scale_m_per_unit"}) {
    if (!meta.contains(key)) {
      throw ConfigError(fmt::format("metadata sidecar missing field '{}'", key));
    }
  }
  if (!meta["video_id"].is_string() || meta["video_id"].get<std::string>().empty())
    throw ConfigError("metadata field 'video_id' must be a non-empty string");
  if (!meta["country"].is_string())
    throw ConfigError("metadata field 'country' must be a string");
  if (!meta["fps"].is_number() || !meta["scale_m_per_unit"].is_number())
    throw ConfigError("metadata fields 'fps' and 'scale_m_per_unit' must be numbers");

  clip.video_id = meta["video_id"].get<std::string>();
  std::string country = meta["country"].get<std::string>();
  if (country.size() != 2 ||
      !std::isalpha(static_cast<unsigned char>(country[0])) ||
      !std::isalpha(static_cast<unsigned char>(country[1]))) {
    throw ConfigError(fmt::format("country '{}' is not an ISO 3166 alpha-2 code", country));
  }
  clip.country = {static_cast<char>(std::toupper(static_cast<unsigned char>(country[0]))),
                  static_cast<char>(std::toupper(static_cast<unsigned char>(country[1])))};
  clip.fps = meta["fps"].get<double>();
  clip.scale_m_per_unit = meta["scale_m_per_unit"].get<double>();
  if (!(clip.fps > 0.0)) throw ConfigError("metadata field 'fps' must be positive");
  if (!(clip.scale_m_per_unit > 0.0))
    throw ConfigError("metadata field 'scale_m_per_unit' must be positive");
  return clip;
}

inline std::string metadata_to_json(const VideoClip& clip) {
  nlohmann::json meta;
  meta["video_id"] = clip.video_id;
  meta["country"] = clip.country;
  meta["fps"] = clip.fps;
  meta["scale_m_per_unit"] = clip.scale_m_per_unit;
  return meta.dump(2) + "\n";
}

// --- trajectory CSV ---------------------------------------------------------

// Parses rows into a clip in original tracker units. Rows may arrive in any
// order; they are sorted by (agent_id, frame). Duplicate (agent_id, frame)
// pairs are rejected.
inline VideoClip parse_clip(std::istream& trajectory_csv, std::istream& metadata_json) {
  VideoClip clip = parse_metadata(metadata_json);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(trajectory_csv, line)) {
    throw ParseError("trajectory CSV is empty (missing header)");
  }
  ++line_no;
  if (detail::trim(line) != kTrajectoryCsvHeader) {
    throw ParseError(fmt::format("line 1: expected header '{}', got '{}'",
                                 kTrajectoryCsvHeader, detail::trim(line)));
  }

  struct Row {
    AgentId agent;
    FrameIndex frame;
    Vec2 pos;
  };
  std::vector<Row> rows;
  while (std::getline(trajectory_csv, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 4) {
      throw ParseError(fmt::format("line {}: expected 4 fields, got {}", line_no, fields.size()));
    }
    Row row{};
    row.frame = detail::parse_number<FrameIndex>(fields[0], line_no, "frame");
    if (row.frame < 0) {
      throw ParseError(fmt::format("line {}: negative frame index {}", line_no, row.frame));
    }
    row.agent = detail::parse_number<AgentId>(fields[1], line_no, "agent_id");
    row.pos.x = detail::parse_number<double>(fields[2], line_no, "x");
    row.pos.y = detail::parse_number<double>(fields[3], line_no, "y");
    rows.push_back(row);
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.agent, a.frame) < std::tie(b.agent, b.frame);
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].agent == rows[i - 1].agent && rows[i].frame == rows[i - 1].frame) {
      throw ValidationError(fmt::format("duplicate observation for agent {} at frame {}",
                                        rows[i].agent, rows[i].frame));
    }
  }
  for (const Row& row : rows) {
    clip.trajectories[row.agent].push_back({row.frame, row.pos});
  }
  return clip;
}

// Emits the CSV in (agent_id, frame) order with round-trip-exact doubles, so
// parse(serialize(clip)) == clip for any valid clip.
inline std::string serialize_clip_csv(const VideoClip& clip) {
  std::string out{kTrajectoryCsvHeader};
  out.push_back('\n');
  for (const auto& [agent, obs] : clip.trajectories) {
    for (const FrameObservation& o : obs) {
      out += fmt::format("{},{},{},{}\n", o.frame, agent, o.position.x, o.position.y);
    }
  }
  return out;
}

// --- validation -------------------------------------------------------------

struct ValidatedClip {
  VideoClip clip;
  DropReport report;
};

// Splits each trajectory where consecutive frames are more than
// gap_threshold apart, drops segments shorter than kMinObservationsPerAgent
// and reports every drop. The first surviving segment keeps the original
// agent id; later ones get fresh ids above the clip's maximum. Idempotent.
inline ValidatedClip validate_clip(const VideoClip& input,
                                   FrameIndex gap_threshold = kDefaultGapThreshold) {
  if (gap_threshold < 1) throw ConfigError("gap threshold must be >= 1");

  ValidatedClip result;
  result.clip.video_id = input.video_id;
  result.clip.country = input.country;
  result.clip.fps = input.fps;
  result.clip.scale_m_per_unit = input.scale_m_per_unit;

  AgentId next_fresh_id = 0;
  for (const auto& [agent, obs] : input.trajectories) {
    next_fresh_id = std::max(next_fresh_id, agent + 1);
  }

  for (const auto& [agent, obs] : input.trajectories) {
    std::vector<std::vector<FrameObservation>> segments;
    segments.emplace_back();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (i > 0 && obs[i].frame - obs[i - 1].frame > gap_threshold) {
        segments.emplace_back();
      }
      segments.back().push_back(obs[i]);
    }

    bool original_id_used = false;
    for (const auto& segment : segments) {
      if (segment.size() < kMinObservationsPerAgent) {
        result.report.drops.push_back(
            {agent, segments.size() == 1 ? "fewer_than_3_observations"
                                         : "segment_fewer_than_3_observations"});
        continue;
      }
      const AgentId id = original_id_used ? next_fresh_id++ : agent;
      original_id_used = true;
      result.clip.trajectories[id] = segment;
    }
  }

  if (result.clip.trajectories.empty()) {
    throw InsufficientDataError(
        fmt::format("clip '{}' has no usable trajectories after validation", input.video_id));
  }
  return result;
}

// Converts positions into meters and records the fact in the scale field, so
// a second application is a no-op.
inline VideoClip scale_to_meters(VideoClip clip) {
  if (!(clip.scale_m_per_unit > 0.0)) {
    throw ConfigError(fmt::format("clip '{}': scale_m_per_unit must be positive", clip.video_id));
  }
  const double s = clip.scale_m_per_unit;
  if (s != 1.0) {
    for (auto& [agent, obs] : clip.trajectories) {
      for (FrameObservation& o : obs) o.position = o.position * s;
    }
  }
  clip.scale_m_per_unit = 1.0;
  return clip;
}

inline std::string drop_report_to_json(const DropReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const DropRecord& d : report.drops) {
    arr.push_back({{"agent_id", d.agent_id}, {"reason", d.reason}});
  }
  return arr.dump(2) + "\n";
}

// --- file-level helpers -----------------------------------------------------

// Loads `<stem>.csv` together with its `<stem>.meta.json` sidecar.
inline VideoClip load_clip_file(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw ConfigError(fmt::format("cannot open trajectory file '{}'", csv_path.string()));
  std::filesystem::path meta_path = csv_path;
  meta_path.replace_extension(".meta.json");
  std::ifstream meta(meta_path);
  if (!meta) throw ConfigError(fmt::format("cannot open metadata sidecar '{}'", meta_path.string()));
  try {
    return parse_clip(csv, meta);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(fmt::format("while reading '{}': {}", csv_path.string(), e.what()));
  }
}

inline void write_clip_files(const VideoClip& clip, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (clip.video_id + ".csv");
  const auto meta_path = dir / (clip.video_id + ".meta.json");
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError(fmt::format("cannot write '{}'", csv_path.string()));
  csv << serialize_clip_csv(clip);
  std::ofstream meta(meta_path);
  if (!meta) throw ConfigError(fmt::format("cannot write '{}'", meta_path.string()));
  meta << metadata_to_json(clip);
}

}  // namespace crowdocean
