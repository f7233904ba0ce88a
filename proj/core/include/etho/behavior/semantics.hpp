#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etho/behavior/segments.hpp"
#include "etho/perception/client.hpp"

namespace etho::behavior {

using perception::PerceptionClient;

inline constexpr std::string_view kUncaptionedLabel = "uncaptioned";
inline constexpr std::string_view kUncaptionedDescription = "(no caption available for this clip)";

struct ClipCaption {
  ClipSegment clip;
  int clip_id = 0;  // position in the animal's clip list
  std::string label;
  std::string description;
  double fps = 10.0;  // sampling rate of the attached frames
  std::vector<long long> frames;
  int attempts = 0;
  bool uncaptioned = false;
};

struct CaptionConfig {
  double fps = 10.0;
  int max_retries = 2;
  // Frame image path; "{animal}" and "{frame}" / "{frame:06}" are expanded.
  std::string frame_template;

  void validate() const;
};

// Source frame indices sampled uniformly at `target_fps` over [start, end):
// round(duration * target_fps) frames, index_j = start + floor(j * src / target).
// Every frame when the source rate is not above the target.
std::vector<long long> downsample_frames(long long start, long long end, double source_fps, double target_fps);

// Requests a short label and a description for one clip. The full scene is
// attached; the focal animal is named in the prompt. On ClientSchemaError the
// clip is returned marked uncaptioned; ClientUnavailable propagates.
ClipCaption caption_clip(const ClipSegment& clip, int clip_id, double source_fps, const CaptionConfig& config,
                         const PerceptionClient& client);

struct MergedSegment {
  std::string animal;
  long long start = 0;
  long long end = 0;
  std::string label;
  std::string description;
  std::vector<int> members;  // clip ids, consecutive
  bool fallback = false;     // produced by label-equality grouping

  friend bool operator==(const MergedSegment&, const MergedSegment&) = default;
};

struct MergeConfig {
  double epoch_seconds = 60.0;
  int max_retries = 2;

  void validate() const;
};

struct MergeReport {
  int calls = 0;
  int attempts = 0;
  int fallbacks = 0;
  int unavailable = 0;
};

// Groups adjacent clips whose labels are identical.
std::vector<MergedSegment> merge_by_label(std::span<const ClipCaption> captions);

// Epoch boundaries as [first, last] clip positions: each epoch spans at most
// epoch_seconds of clips (at least one clip) and starts on the previous
// epoch's last clip.
std::vector<std::pair<std::size_t, std::size_t>> merge_epochs(std::span<const ClipCaption> captions, double fps,
                                                              double epoch_seconds);

// Sends each epoch's captions as text and applies the returned grouping.
// Epoch results are chained by uniting the groups that share the overlap
// clip; the united group keeps the label of the larger side (earlier on
// ties). Invalid groupings are re-requested; an epoch whose retries run out,
// or whose client is unavailable, falls back to merge_by_label.
std::vector<MergedSegment> merge_segments(std::span<const ClipCaption> captions, double fps,
                                          const MergeConfig& config, const PerceptionClient& client,
                                          MergeReport* report = nullptr);

// Prompt templates; placeholders in braces are filled per request.
inline constexpr std::string_view kBehaviorPromptVersion = "behavior-prompts/v1";
extern const std::string_view kCaptionPrompt;
extern const std::string_view kMergePrompt;

}  // namespace etho::behavior
