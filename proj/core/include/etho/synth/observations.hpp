#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "etho/perception/oracle.hpp"
#include "etho/pose/io.hpp"
#include "etho/synth/rig.hpp"
#include "etho/synth/skeleton.hpp"

namespace etho::synth {

struct ObservationConfig {
  double noise_sigma = 1.0;  // px, Gaussian per coordinate
  double occlusion = 0.0;    // i.i.d. per keypoint and view
  bool shuffle = true;       // randomize local centroid indices
  double bbox_margin = 8.0;  // px added around the projected body

  void validate() const;
};

struct SimulatedSequence {
  std::vector<pose::FrameBundle> frames;
  std::map<long long, pose::AssignmentState> truth;  // every keypoint in every view
  pose::RegionTable regions;                         // ground-truth region boxes
  std::map<long long, Pose3D> points;                // ground-truth 3D keypoints
};

// Projects every pose into every camera, adds noise, drops occluded or
// off-image keypoints and numbers the survivors. Frame f uses an RNG stream
// keyed on (seed, f, view), so frames can be generated independently.
SimulatedSequence render_observations(const std::vector<Pose3D>& trajectory, const std::vector<CameraModel>& rig,
                                      const ObservationConfig& config, std::uint64_t seed, long long first_frame = 0);

perception::PoseTruth pose_truth(const SimulatedSequence& sequence);

std::string point_rows(long long frame, const Pose3D& pose);

}  // namespace etho::synth
