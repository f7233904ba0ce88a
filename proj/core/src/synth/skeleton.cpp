#include "etho/synth/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "etho/error.hpp"

namespace etho::synth {

using K = Keypoint;

const std::array<Bone, 11>& skeleton_bones() {
  static const std::array<Bone, 11> kBones = {{
      {K::kBackMiddle, K::kBackTop, {25.0, 0.0, 2.0}},
      {K::kBackMiddle, K::kBackBottom, {-25.0, 0.0, 0.0}},
      {K::kBackTop, K::kEarL, {15.0, 10.0, 8.0}},
      {K::kBackTop, K::kEarR, {15.0, -10.0, 8.0}},
      {K::kBackTop, K::kForepawL, {5.0, 12.0, -28.0}},
      {K::kBackTop, K::kForepawR, {5.0, -12.0, -28.0}},
      {K::kBackBottom, K::kHindpawL, {-5.0, 14.0, -28.0}},
      {K::kBackBottom, K::kHindpawR, {-5.0, -14.0, -28.0}},
      {K::kBackBottom, K::kTailBase, {-15.0, 0.0, -5.0}},
      {K::kTailBase, K::kTailMiddle, {-40.0, 0.0, -10.0}},
      {K::kTailMiddle, K::kTailTip, {-40.0, 0.0, -10.0}},
  }};
  return kBones;
}

double bone_length(const Bone& b) {
  return std::hypot(b.rest_offset[0], b.rest_offset[1], b.rest_offset[2]);
}

void SkeletonConfig::validate() const {
  if (!(arena_radius > 0.0)) throw ConfigError("skeleton.arena_radius must be > 0");
  if (!(mean_speed >= 0.0)) throw ConfigError("skeleton.mean_speed must be >= 0");
  if (!(smoothness >= 0.0 && smoothness < 1.0)) throw ConfigError("skeleton.smoothness must be in [0,1)");
  if (!(velocity_cap > 0.0)) throw ConfigError("skeleton.velocity_cap must be > 0");
}

namespace {

struct Params {
  double x = 0.0, y = 0.0, heading = 0.0;
  double head_yaw = 0.0, tail1 = 0.0, tail2 = 0.0;
  double gait = 0.0, swing = 0.0;

  Params blend(const Params& to, double s) const {
    auto mix = [s](double a, double b) { return a + s * (b - a); };
    return {mix(x, to.x),       mix(y, to.y),       mix(heading, to.heading), mix(head_yaw, to.head_yaw),
            mix(tail1, to.tail1), mix(tail2, to.tail2), mix(gait, to.gait),       mix(swing, to.swing)};
  }
};

Eigen::Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }
Eigen::Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix(); }

Pose3D pose_from(const Params& p, double height) {
  std::array<Eigen::Vector3d, pose::kNumKeypoints> body;
  std::array<Eigen::Matrix3d, pose::kNumKeypoints> frame;  // accumulated joint rotation per keypoint
  body[pose::index_of(K::kBackMiddle)] = Eigen::Vector3d::Zero();
  frame[pose::index_of(K::kBackMiddle)] = Eigen::Matrix3d::Identity();
  for (const auto& b : skeleton_bones()) {
    const Eigen::Vector3d rest(b.rest_offset[0], b.rest_offset[1], b.rest_offset[2]);
    Eigen::Matrix3d local = Eigen::Matrix3d::Identity();
    switch (b.child) {
      case K::kEarL:
      case K::kEarR:
        local = rot_z(p.head_yaw);
        break;
      case K::kForepawL:
      case K::kHindpawR:
        local = rot_y(p.swing * std::sin(p.gait));
        break;
      case K::kForepawR:
      case K::kHindpawL:
        local = rot_y(-p.swing * std::sin(p.gait));
        break;
      case K::kTailMiddle:
        local = rot_z(p.tail1);
        break;
      case K::kTailTip:
        local = rot_z(p.tail2);
        break;
      default:
        break;
    }
    const auto pi = pose::index_of(b.parent);
    const auto ci = pose::index_of(b.child);
    frame[ci] = frame[pi] * local;
    body[ci] = body[pi] + frame[ci] * rest;
  }
  const Eigen::Matrix3d r = rot_z(p.heading);
  const Eigen::Vector3d origin(p.x, p.y, height);
  Pose3D out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = WorldPoint::from(origin + r * body[i]);
  return out;
}

}  // namespace

double max_displacement(const Pose3D& a, const Pose3D& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i].vec() - b[i].vec()).norm());
  return m;
}

std::vector<Pose3D> generate_skeleton_trajectory(int frames, const SkeletonConfig& c, std::uint64_t seed) {
  if (frames < 1) throw ValidationError("trajectory needs at least one frame");
  c.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double a = c.smoothness;
  const double innov = std::sqrt(1.0 - a * a);

  Params p;
  const double r0 = 0.5 * c.arena_radius * std::sqrt(u01(rng));
  const double t0 = 2.0 * std::numbers::pi * u01(rng);
  p.x = r0 * std::cos(t0);
  p.y = r0 * std::sin(t0);
  p.heading = 2.0 * std::numbers::pi * u01(rng);
  p.swing = c.paw_swing_max;
  double speed = c.mean_speed, turn = 0.0;
  double hy = 0.0, w1 = 0.0, w2 = 0.0;  // latent articulation drivers in [-1, 1] after tanh

  std::vector<Pose3D> out;
  out.reserve(static_cast<std::size_t>(frames));
  Pose3D prev = pose_from(p, c.body_height);
  out.push_back(prev);
  for (int f = 1; f < frames; ++f) {
    speed = std::max(0.0, a * speed + (1.0 - a) * c.mean_speed + innov * 0.5 * c.mean_speed * n01(rng));
    turn = a * turn + innov * 0.05 * n01(rng);
    hy = a * hy + innov * n01(rng);
    w1 = a * w1 + innov * n01(rng);
    w2 = a * w2 + innov * n01(rng);

    Params next = p;
    const double r = std::hypot(p.x, p.y);
    if (r > 0.7 * c.arena_radius) {
      // Steer toward the arena centre.
      const double want = std::atan2(-p.y, -p.x);
      const double diff = std::remainder(want - p.heading, 2.0 * std::numbers::pi);
      turn += 0.1 * diff;
    }
    next.heading = p.heading + turn;
    next.x = p.x + speed * std::cos(next.heading);
    next.y = p.y + speed * std::sin(next.heading);
    const double nr = std::hypot(next.x, next.y);
    if (nr > c.arena_radius) {
      next.x *= c.arena_radius / nr;
      next.y *= c.arena_radius / nr;
    }
    next.head_yaw = c.head_yaw_max * std::tanh(hy);
    next.tail1 = c.tail_wag_max * std::tanh(w1);
    next.tail2 = c.tail_wag_max * std::tanh(w2);
    next.gait = p.gait + 0.25 * speed;

    Pose3D cand = pose_from(next, c.body_height);
    double s = 1.0;
    while (max_displacement(prev, cand) > c.velocity_cap) {
      s *= 0.5;
      if (s < 1e-6) {
        next = p;
        cand = prev;
        break;
      }
      next = p.blend(next, 0.5);
      cand = pose_from(next, c.body_height);
    }
    if (s < 1.0) speed = std::hypot(next.x - p.x, next.y - p.y);
    p = next;
    prev = cand;
    out.push_back(cand);
  }
  return out;
}

}  // namespace etho::synth
