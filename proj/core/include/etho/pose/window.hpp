#pragma once

#include <array>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "etho/pose/frame.hpp"

namespace etho::pose {

using RegionBoxes = std::array<Rect, kNumRegions>;

// A completed frame reused as a few-shot exemplar.
struct ExemplarFrame {
  FrameBundle frame;
  std::map<std::string, RegionBoxes> regions;  // per view
  AssignmentState assignments;

  long long frame_index() const { return frame.frame_index; }
};

// The three most recent completed frames, oldest first.
class RollingWindow {
 public:
  static constexpr std::size_t kCapacity = 3;

  // Requires exactly three seed frames with strictly increasing indices and
  // injective, schema-complete assignments; throws ValidationError.
  explicit RollingWindow(std::vector<ExemplarFrame> seeds);

  void push(ExemplarFrame frame);

  const std::deque<ExemplarFrame>& entries() const { return entries_; }
  const ExemplarFrame& latest() const { return entries_.back(); }
  bool full() const { return entries_.size() == kCapacity; }

 private:
  std::deque<ExemplarFrame> entries_;
};

// Region boxes implied by a labeled frame: the bounding box of each
// region's assigned centroids, padded and clamped to the crop. Regions with
// no assigned centroid get the whole crop.
RegionBoxes regions_from_assignment(const FrameObservation& obs, const ViewAssignment& assignment,
                                    double margin = 12.0);

// Checks a seed label set: every keypoint present in every view of the
// frame, assigned centroids exist, and no centroid is used twice.
void validate_seed(const ExemplarFrame& seed);

}  // namespace etho::pose
