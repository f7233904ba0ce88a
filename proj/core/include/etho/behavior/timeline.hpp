#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/behavior/semantics.hpp"

namespace etho::behavior {

inline constexpr std::string_view kTimelineVersion = "etho-timeline/v1";

struct AnimalTimeline {
  long long frames = 0;
  std::vector<ClipCaption> clips;      // lineage, in temporal order
  std::vector<MergedSegment> segments;
};

struct BehaviorTimeline {
  double fps = 10.0;
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, AnimalTimeline> animals;

  // Throws ValidationError naming the animal and the violated property:
  // "non-covering", "overlapping", "unordered", or "lineage".
  void validate() const;
};

// Assembles and validates a timeline.
BehaviorTimeline build_timeline(std::map<std::string, AnimalTimeline> animals, double fps,
                                nlohmann::json metadata = nlohmann::json::object());

nlohmann::json to_json(const BehaviorTimeline& timeline);
BehaviorTimeline timeline_from_json(const nlohmann::json& doc);

void write_timeline(const std::filesystem::path& path, const BehaviorTimeline& timeline);
BehaviorTimeline read_timeline(const std::filesystem::path& path);

// Flat table, one row per merged segment. Text fields are quoted.
inline constexpr std::string_view kTimelineTableHeader =
    "animal,segment,start_frame,end_frame,start_s,end_s,label,clips,clusters,fallback,description";
std::string timeline_table(const BehaviorTimeline& timeline);

// Caption records (one JSON object per line) for resumable captioning.
nlohmann::json to_json(const ClipCaption& caption);
ClipCaption caption_from_json(const nlohmann::json& j, double source_fps);

}  // namespace etho::behavior
