#include "etho/geometry/camera.hpp"

#include <cmath>

#include <Eigen/LU>

#include "etho/error.hpp"

namespace etho::geometry {

void CameraModel::validate() const {
  const std::string who = "camera '" + name + "': ";
  if (name.empty()) throw ValidationError("camera with empty name");
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError(who + "image_size must be positive");
  }
  if (!intrinsics.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError(who + "non-finite calibration entry");
  }
  if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0) {
    throw ValidationError(who + "focal lengths must be positive");
  }
  if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0) {
    throw ValidationError(who + "intrinsics must be upper triangular");
  }
  if (intrinsics(2, 2) != 1.0) throw ValidationError(who + "intrinsics(2,2) must be 1");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) throw ValidationError(who + "rotation is not orthonormal");
  if (rotation.determinant() <= 0.0) throw ValidationError(who + "rotation is a reflection");
}

Eigen::Matrix<double, 3, 4> CameraModel::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rotation;
  rt.col(3) = translation;
  return intrinsics * rt;
}

bool CameraModel::in_image(const PixelPoint& p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < image_size.width && p.y < image_size.height;
}

PixelPoint project(const CameraModel& camera, const WorldPoint& point) {
  const Eigen::Vector3d pc = camera.to_camera(point);
  if (!(pc.z() > kMinDepth)) {
    throw DegenerateDepth("point at depth " + std::to_string(pc.z()) + " mm in camera '" +
                          camera.name + "'");
  }
  const Eigen::Vector3d h = camera.intrinsics * pc;
  return {h.x() / h.z(), h.y() / h.z()};
}

double reprojection_error(const CameraModel& camera, const WorldPoint& point,
                          const PixelPoint& observed) {
  const PixelPoint p = project(camera, point);
  return std::hypot(p.x - observed.x, p.y - observed.y);
}

}  // namespace etho::geometry
