#pragma once

#include <string>

#include <Eigen/Core>

namespace etho::geometry {

// Sub-pixel location in the full-resolution frame. May lie outside the image.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  Eigen::Vector2d vec() const { return {x, y}; }
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

// World coordinates in millimeters.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static WorldPoint from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Calibrated pinhole camera without lens distortion. Extrinsics map world to
// camera coordinates: X_cam = rotation * X_world + translation.
struct CameraModel {
  std::string name;
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  ImageSize image_size;

  // Throws ValidationError when a calibration invariant does not hold.
  void validate() const;

  Eigen::Matrix<double, 3, 4> projection_matrix() const;
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
  Eigen::Vector3d to_camera(const WorldPoint& p) const { return rotation * p.vec() + translation; }
  bool in_image(const PixelPoint& p) const;
};

// Minimum camera-frame depth (mm) for a point to count as in front of the camera.
inline constexpr double kMinDepth = 1e-9;

// Perspective projection; throws DegenerateDepth when depth <= kMinDepth.
PixelPoint project(const CameraModel& camera, const WorldPoint& point);

double reprojection_error(const CameraModel& camera, const WorldPoint& point,
                          const PixelPoint& observed);

}  // namespace etho::geometry
