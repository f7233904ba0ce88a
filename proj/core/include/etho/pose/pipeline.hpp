#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/consensus/qc.hpp"
#include "etho/consensus/refine.hpp"
#include "etho/pose/stages.hpp"

namespace etho::pose {

// Pipeline variants: all four stages; Stages 1-3 without the geometric
// correction (plain DLT over every assigned view); and additionally without
// region decomposition (one whole-crop assignment call per view).
enum class Ablation { kFull, kNoRefine, kNaive };

std::string_view name_of(Ablation a);
std::optional<Ablation> parse_ablation(std::string_view name);

struct PoseRunConfig {
  Ablation ablation = Ablation::kFull;
  consensus::RefineConfig refine;
  int max_retries = 2;
  // Skip frames with any QC flag when updating the exemplar window.
  bool strict_window = false;
  // Concurrent per-view client calls within one frame.
  int workers = 1;

  void validate() const;
};

struct FrameOutput {
  long long frame_index = 0;
  AssignmentState assignments;
  std::map<std::string, RegionBoxes> regions;  // Stage-1 boxes (crop in naive mode)
  std::vector<consensus::KeypointResult> estimates;
  std::vector<consensus::QcRecord> qc;
  std::vector<nlohmann::json> refine_log;
  StageReport report;
  bool window_updated = false;
};

// Sequential per-frame driver holding the rolling exemplar window.
class PoseRunner {
 public:
  PoseRunner(consensus::CameraSet cameras, RollingWindow window, const PerceptionClient& client,
             PoseRunConfig config);

  // Runs Stages 1-4 and QC on one frame, then appends it to the window.
  // Client failures degrade the frame; they never throw.
  FrameOutput process(const FrameBundle& frame);

  const RollingWindow& window() const { return window_; }

 private:
  AssignmentState label_views(const FrameBundle& frame, FrameOutput& out);

  consensus::CameraSet cameras_;
  RollingWindow window_;
  const PerceptionClient& client_;
  PoseRunConfig config_;
};

// QC over final estimates, plus flags for assignment-level problems: a slot
// flagged by a fallback ("assignment-flag") and any keypoint of a degraded
// frame ("degraded-frame").
std::vector<consensus::QcRecord> frame_qc(const std::vector<consensus::KeypointResult>& estimates,
                                          const AssignmentState& state, bool degraded, double tau_qc);

// Convenience wrapper: processes `frames` in order, calling `on_frame` after
// each one.
std::vector<FrameOutput> run_sequence(const std::vector<FrameBundle>& frames, std::vector<ExemplarFrame> seeds,
                                      const consensus::CameraSet& cameras, const PoseRunConfig& config,
                                      const PerceptionClient& client,
                                      const std::function<void(const FrameOutput&)>& on_frame = {});

}  // namespace etho::pose
