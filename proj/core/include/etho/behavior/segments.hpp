#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "etho/behavior/dec.hpp"

namespace etho::behavior {

struct ClipSegment {
  std::string animal;
  long long start = 0;  // first frame
  long long end = 0;    // one past the last frame
  int cluster = 0;
  double duration = 0.0;  // seconds

  long long length() const { return end - start; }
  friend bool operator==(const ClipSegment&, const ClipSegment&) = default;
};

// Per-frame argmax of a soft assignment; ties go to the lower cluster id.
std::vector<int> hard_labels(const Eigen::MatrixXd& q);

// Run-length encoding of per-frame labels.
std::vector<ClipSegment> segments_from_labels(const std::string& animal, const std::vector<int>& labels, double fps);

std::vector<int> labels_from_segments(const std::vector<ClipSegment>& segments);

// Absorbs runs shorter than min_duration seconds, shortest first (earliest on
// ties), into the longer neighbour; the first run can only merge forward and
// the last only backward. Equal-length neighbours: the earlier one wins.
std::vector<ClipSegment> absorb_short_runs(std::vector<ClipSegment> segments, double min_duration, double fps);

std::vector<ClipSegment> segment_extract(const FeatureSequence& sequence, const DecModel& model,
                                         double min_duration);

// Throws ValidationError unless the segments are sorted, non-empty, cover
// [0, frames) without overlap and adjacent segments differ in cluster.
void validate_partition(const std::vector<ClipSegment>& segments, long long frames);

// Table: animal,start_frame,end_frame,cluster
inline constexpr std::string_view kSegmentsHeader = "animal,start_frame,end_frame,cluster";
std::string segment_rows(const std::vector<ClipSegment>& segments);
std::vector<ClipSegment> read_segments(const std::filesystem::path& path, double fps);

}  // namespace etho::behavior
