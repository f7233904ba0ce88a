#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "etho/geometry/camera.hpp"
#include "etho/pose/schema.hpp"

namespace etho::synth {

using geometry::WorldPoint;
using pose::Keypoint;

using Pose3D = std::array<WorldPoint, pose::kNumKeypoints>;

// Mouse-proportioned tree rooted at back_middle. Offsets are in the body
// frame (x forward, y left, z up), millimeters.
struct Bone {
  Keypoint parent;
  Keypoint child;
  std::array<double, 3> rest_offset;
};
const std::array<Bone, 11>& skeleton_bones();
double bone_length(const Bone& bone);

struct SkeletonConfig {
  double arena_radius = 150.0;  // mm; the root stays inside this disc
  double body_height = 30.0;    // root height above the floor, mm
  double mean_speed = 1.5;      // mm per frame
  double smoothness = 0.9;      // AR(1) coefficient of the random walk
  double velocity_cap = 6.0;    // max per-frame displacement of any keypoint, mm
  double head_yaw_max = 0.5;    // rad
  double tail_wag_max = 0.5;    // rad per tail joint
  double paw_swing_max = 0.35;  // rad

  void validate() const;
};

// Band-limited random-walk trajectory. Articulation rotates rest offsets, so
// bone lengths are exact; steps exceeding velocity_cap are shortened by
// blending the articulation parameters toward the previous frame.
std::vector<Pose3D> generate_skeleton_trajectory(int frames, const SkeletonConfig& config, std::uint64_t seed);

double max_displacement(const Pose3D& a, const Pose3D& b);

}  // namespace etho::synth
