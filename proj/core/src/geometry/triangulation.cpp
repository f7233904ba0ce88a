#include "etho/geometry/triangulation.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "etho/error.hpp"

namespace etho::geometry {

namespace {

struct View {
  Eigen::Matrix<double, 3, 4> p;  // [R | t] composed with the world conditioning
  Eigen::Vector2d m;              // normalized image coordinates
  double fx = 1.0;
  double fy = 1.0;
};

Eigen::Vector4d solve(const std::vector<View>& views, const std::vector<double>& weights, bool check) {
  Eigen::MatrixX4d a(2 * views.size(), 4);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    a.row(2 * i) = weights[i] * v.fx * (v.m.x() * v.p.row(2) - v.p.row(0));
    a.row(2 * i + 1) = weights[i] * v.fy * (v.m.y() * v.p.row(2) - v.p.row(1));
  }
  Eigen::JacobiSVD<Eigen::MatrixX4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d& s = svd.singularValues();
  if (check && (!(s(2) > 0.0) || s(0) / s(2) > kDltConditionLimit)) {
    throw DegenerateGeometry("rank-deficient triangulation system");
  }
  return svd.matrixV().col(3);
}

}  // namespace

WorldPoint triangulate_dlt(std::span<const Observation> observations) {
  if (observations.size() < 2) {
    throw InsufficientViews("triangulation needs at least 2 views, got " +
                            std::to_string(observations.size()));
  }

  // World frame centered on the camera centers, unit mean distance.
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& obs : observations) c += obs.camera.get().center();
  c /= static_cast<double>(observations.size());
  double s = 0.0;
  for (const auto& obs : observations) s += (obs.camera.get().center() - c).norm();
  s /= static_cast<double>(observations.size());
  if (!(s > 0.0)) s = 1.0;
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() *= s;
  t.topRightCorner<3, 1>() = c;

  std::vector<View> views;
  for (const auto& obs : observations) {
    const auto& cam = obs.camera.get();
    Eigen::Matrix<double, 3, 4> rt;
    rt.leftCols<3>() = cam.rotation;
    rt.col(3) = cam.translation;
    const Eigen::Vector3d m = cam.intrinsics.inverse() * Eigen::Vector3d(obs.pixel.x, obs.pixel.y, 1.0);
    View v{rt * t, m.hnormalized(), cam.intrinsics(0, 0), cam.intrinsics(1, 1)};
    if (!v.m.allFinite() || !v.p.allFinite() || !(std::abs(m.z()) > 0.0)) {
      throw DegenerateGeometry("degenerate constraint from camera '" + cam.name + "'");
    }
    views.push_back(v);
  }

  // Second solve divides each view by its depth so the algebraic residual
  // approximates the pixel reprojection error.
  std::vector<double> w(views.size(), 1.0);
  Eigen::Vector4d y = solve(views, w, true);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const double depth = views[i].p.row(2).dot(y) / y(3);
    w[i] = std::isfinite(depth) && depth > 0.0 ? 1.0 / depth : 1.0;
  }
  y = solve(views, w, false);

  if (std::abs(y(3)) < 1e-14 * y.head<3>().norm()) {
    throw DegenerateGeometry("triangulated point at infinity");
  }
  const Eigen::Vector4d x = t * y;
  return WorldPoint::from(x.head<3>() / x(3));
}

}  // namespace etho::geometry
