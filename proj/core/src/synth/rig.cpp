#include "etho/synth/rig.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "etho/error.hpp"

namespace etho::synth {

void RigConfig::validate() const {
  if (n_cameras < 2) throw ValidationError("a rig needs at least 2 cameras");
  if (!(ring_radius > 0.0)) throw ConfigError("rig.ring_radius must be > 0");
  if (!(focal > 0.0)) throw ConfigError("rig.focal must be > 0");
  if (image.width <= 0 || image.height <= 0) throw ConfigError("rig.image_size must be positive");
  if (!(position_jitter >= 0.0) || !(target_jitter >= 0.0)) throw ConfigError("rig jitter must be >= 0");
}

CameraModel look_at(std::string name, const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double focal,
                    geometry::ImageSize image) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  CameraModel cam;
  cam.name = std::move(name);
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.intrinsics << focal, 0.0, image.width / 2.0, 0.0, focal, image.height / 2.0, 0.0, 0.0, 1.0;
  cam.image_size = image;
  cam.validate();
  return cam;
}

std::vector<CameraModel> generate_rig(const RigConfig& c, std::uint64_t seed) {
  c.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<CameraModel> out;
  for (int i = 0; i < c.n_cameras; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / c.n_cameras;
    Eigen::Vector3d eye(c.ring_radius * std::cos(angle), c.ring_radius * std::sin(angle), c.height);
    eye += c.position_jitter * Eigen::Vector3d(u(rng), u(rng), u(rng));
    Eigen::Vector3d target(0.0, 0.0, c.target_height);
    target += c.target_jitter * Eigen::Vector3d(u(rng), u(rng), u(rng));
    out.push_back(look_at("cam" + std::to_string(i), eye, target, c.focal, c.image));
  }
  return out;
}

}  // namespace etho::synth
