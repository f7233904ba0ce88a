#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "etho/geometry/triangulation.hpp"
#include "etho/pose/schema.hpp"

namespace etho::consensus {

using geometry::Observation;
using geometry::WorldPoint;

struct RansacConfig {
  enum class Mode { kAuto, kExhaustive, kRandomized };

  double tau_reproj = 5.0;  // inlier threshold, pixels
  int max_subset_size = 2;  // cameras per randomized seed subset
  int iterations = 200;     // randomized seed subsets drawn
  std::uint64_t seed = 0;
  Mode mode = Mode::kAuto;
  // kAuto enumerates every subset of size >= 2 up to this many cameras.
  int exhaustive_max_cameras = 6;

  void validate() const;
  bool exhaustive_for(std::size_t n_cameras) const;
};

struct Keypoint3DEstimate {
  pose::Keypoint keypoint = pose::Keypoint::kEarL;
  WorldPoint point;
  std::set<std::string> inlier_cameras;
  // Error in every observed camera; +inf where the point is behind it.
  std::map<std::string, double> per_camera_error;
  double mean_inlier_error = 0.0;

  // Mean error over every observed camera (inliers and outliers).
  double mean_error_all() const;
};

// Winner of the subset search before the final re-triangulation.
struct ConsensusSelection {
  std::vector<std::string> seed_subset;
  std::set<std::string> inliers;
  double mean_inlier_error = 0.0;
  WorldPoint point;
};

// Scans seed subsets (all of them in exhaustive mode) and keeps the one with
// the most inliers; ties go to the lower mean inlier error, then to the
// lexicographically smaller inlier name list. Throws NoConsensus when no
// subset reaches two inliers.
ConsensusSelection select_consensus(std::span<const Observation> observations,
                                    const RansacConfig& config);

// select_consensus followed by re-triangulation on the inlier cameras.
// Throws InsufficientViews or NoConsensus.
Keypoint3DEstimate ransac_triangulate(std::span<const Observation> observations,
                                      const RansacConfig& config);

// Plain DLT over every observation with all cameras trusted; used when
// consensus refinement is disabled. inlier_cameras lists every camera used.
Keypoint3DEstimate triangulate_trusted(std::span<const Observation> observations);

std::map<std::string, double> camera_errors(std::span<const Observation> observations,
                                            const WorldPoint& point);

}  // namespace etho::consensus
