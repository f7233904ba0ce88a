#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/consensus/ransac.hpp"
#include "etho/pose/frame.hpp"

namespace etho::consensus {

using geometry::CameraModel;
using pose::Keypoint;

using CameraSet = std::map<std::string, CameraModel>;

struct RefineConfig {
  RansacConfig ransac;
  double hypothesis_radius = 40.0;  // pixels around the projected estimate
  double tau_qc = 10.0;

  void validate() const;
};

struct CameraPartition {
  std::set<std::string> locked;
  std::set<std::string> target;
};

CameraPartition partition_cameras(const Keypoint3DEstimate& estimate,
                                  const std::map<std::string, double>& all_errors, double tau);

struct SwapStep {
  Keypoint keypoint;
  std::optional<int> old_centroid;
  std::optional<int> new_centroid;

  friend bool operator==(const SwapStep&, const SwapStep&) = default;
};

struct Hypothesis {
  std::string target_camera;
  Keypoint keypoint = Keypoint::kEarL;
  std::optional<int> candidate_centroid;
  bool keep_current = false;
  // Reassignments of other keypoints needed to keep the view injective.
  std::vector<SwapStep> implied_swaps;
  double score = 0.0;
};

// Candidates for one target camera: keep-current first, then one hypothesis
// per centroid within `radius` of the projected estimate, ordered by
// centroid index. A centroid owned by another keypoint implies that keypoint
// takes over the current centroid. Returns only keep-current when the
// estimate projects behind the camera.
std::vector<Hypothesis> enumerate_hypotheses(const CameraModel& camera,
                                             const pose::FrameObservation& frame,
                                             const pose::ViewAssignment& assignment,
                                             Keypoint keypoint, const Keypoint3DEstimate& estimate,
                                             double radius);

struct FrameContext {
  const CameraSet& cameras;
  const pose::FrameBundle& frame;
  const pose::AssignmentState& state;
  const RansacConfig& ransac;
};

// Penalty (pixels) used for a keypoint that cannot be triangulated.
inline constexpr double kUntriangulatedPenalty = 1e4;

// Mean reprojection error over every assigned camera at the consensus
// estimate, or kUntriangulatedPenalty.
double keypoint_score(const FrameContext& ctx, Keypoint keypoint);

// Scores every hypothesis in place and returns the winner. All hypotheses are
// scored over the same keypoint set (the subject plus every keypoint that any
// hypothesis would displace), so a swap is only taken when the joint error
// drops. Keep-current wins ties.
Hypothesis score_and_select(std::vector<Hypothesis>& hypotheses, const FrameContext& ctx);

void apply_hypothesis(pose::AssignmentState& state, const Hypothesis& h);

struct KeypointResult {
  Keypoint keypoint = Keypoint::kEarL;
  std::optional<Keypoint3DEstimate> estimate;
  std::string status;  // "ok", "no-consensus", "insufficient-views"
};

struct RefineResult {
  pose::AssignmentState state;
  std::vector<KeypointResult> estimates;  // one per keypoint, canonical order
  std::vector<nlohmann::json> log;        // one entry per evaluated target camera
};

std::vector<Observation> gather_observations(const CameraSet& cameras, const pose::FrameBundle& frame,
                                             const pose::AssignmentState& state, Keypoint keypoint);

// Consensus estimate of every keypoint under the given assignment.
std::vector<KeypointResult> estimate_all(const CameraSet& cameras, const pose::FrameBundle& frame,
                                         const pose::AssignmentState& state,
                                         const RansacConfig& config);

// Plain DLT over all assigned views for every keypoint.
std::vector<KeypointResult> estimate_all_trusted(const CameraSet& cameras,
                                                 const pose::FrameBundle& frame,
                                                 const pose::AssignmentState& state);

// Per keypoint in canonical order: consensus, partition, hypotheses per
// target camera, selection, apply. A second sweep revisits keypoints whose
// assignment changed in the first.
RefineResult refine_frame(const pose::AssignmentState& assignments, const pose::FrameBundle& frame,
                          const CameraSet& cameras, const RefineConfig& config);

CameraSet index_cameras(const std::vector<CameraModel>& cameras);

}  // namespace etho::consensus
