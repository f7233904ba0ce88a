#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etho/geometry/camera.hpp"

namespace etho::synth {

using geometry::CameraModel;

struct RigConfig {
  int n_cameras = 6;
  double ring_radius = 700.0;  // horizontal distance of the cameras from the arena centre, mm
  double height = 450.0;       // camera height above the floor, mm
  double target_height = 20.0; // height of the common look-at point, mm
  double focal = 1400.0;       // px
  geometry::ImageSize image{2048, 1400};
  double position_jitter = 20.0;  // mm, uniform per axis
  double target_jitter = 10.0;    // mm, uniform per axis

  void validate() const;
};

// Camera at `eye` looking at `target` with +z world up; image x to the right,
// y down, principal point at the image centre.
CameraModel look_at(std::string name, const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double focal,
                    geometry::ImageSize image);

// Cameras named cam0..camN-1, evenly spaced on a ring around the arena.
std::vector<CameraModel> generate_rig(const RigConfig& config, std::uint64_t seed);

}  // namespace etho::synth
