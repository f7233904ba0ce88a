#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etho/perception/client.hpp"
#include "etho/pose/window.hpp"

namespace etho::pose {

using perception::PerceptionClient;

// Per-call bookkeeping shared by all stages.
struct StageReport {
  int calls = 0;
  int retries = 0;          // attempts beyond the first, summed
  int schema_failures = 0;  // calls that exhausted retries
  int unavailable = 0;      // calls that hit ClientUnavailable
  bool degraded = false;    // a fallback path was taken
  std::vector<std::string> warnings;

  void absorb(const StageReport& other);
};

struct RegionDetection {
  RegionBoxes boxes{};
  StageReport report;
};

// Stage 1. One client call per region; replies are clamped to the crop.
// On client failure the previous frame's box, shifted by the change in crop
// origin, is reused and the result is marked degraded.
RegionDetection detect_regions(const FrameObservation& view, const RollingWindow& window,
                               const PerceptionClient& client, int max_retries);

using PartialAssignment = std::map<Keypoint, std::optional<int>>;

struct RegionAssignment {
  PartialAssignment assignment;
  bool flagged = false;
  StageReport report;
};

// Stage 2. `keypoints` is a region's keypoint list (or all twelve for the
// undecomposed variant) and `box` the area whose centroids are candidates.
// With no candidates the client is not called and every keypoint is
// unassigned. Client failure leaves the keypoints unassigned and flagged.
RegionAssignment assign_within_region(std::string_view region_name, std::span<const Keypoint> keypoints,
                                      const Rect& box, const FrameObservation& view,
                                      const RollingWindow& window, const PerceptionClient& client,
                                      int max_retries);

struct Reconciliation {
  ViewAssignment assignment;
  bool client_invoked = false;
  StageReport report;
};

// Stage 3. Merges per-region results. When two keypoints claim one centroid,
// or an unassigned keypoint coexists with an unused centroid, the client
// resolves those keypoints only; conflict-free assignments are kept. On
// client failure the claim of the keypoint earliest in canonical order wins
// and the other claimants are unassigned and flagged.
Reconciliation reconcile_frame(std::span<const PartialAssignment> partials, const FrameObservation& view,
                               const RollingWindow& window, const PerceptionClient& client,
                               int max_retries);

// Prompt templates; placeholders in braces are filled from the request.
inline constexpr std::string_view kPromptVersion = "pose-prompts/v1";
std::string render_prompt(std::string_view template_text, const nlohmann::json& fields);
extern const std::string_view kRegionDetectPrompt;
extern const std::string_view kRegionAssignPrompt;
extern const std::string_view kReconcilePrompt;

}  // namespace etho::pose
