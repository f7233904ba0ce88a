#include <gtest/gtest.h>

#include <set>

#include "etho/error.hpp"
#include "etho/geometry/camera.hpp"
#include "etho/synth/features.hpp"
#include "etho/synth/observations.hpp"
#include "etho/synth/rig.hpp"
#include "etho/synth/skeleton.hpp"

namespace {

using namespace etho;
using namespace etho::synth;

TEST(Rig, CamerasSeeTheArenaCentre) {
  const auto rig = generate_rig(RigConfig{}, 4);
  ASSERT_EQ(rig.size(), 6u);
  for (const auto& c : rig) {
    EXPECT_NO_THROW(c.validate());
    const auto p = geometry::project(c, {0, 0, 20});
    EXPECT_NEAR(p.x, 1024.0, 40.0);
    EXPECT_NEAR(p.y, 700.0, 40.0);
    EXPECT_NEAR(c.center().head<2>().norm(), 700.0, 40.0);
  }
}

TEST(Rig, SeedDeterminesRig) {
  const auto a = generate_rig(RigConfig{}, 1), b = generate_rig(RigConfig{}, 1), c = generate_rig(RigConfig{}, 2);
  EXPECT_EQ(a[3].translation, b[3].translation);
  EXPECT_NE(a[3].translation, c[3].translation);
}

TEST(Rig, LookAtPointsCameraAtTarget) {
  const auto c = look_at("x", {500, 0, 300}, {0, 0, 0}, 1000, {800, 600});
  const auto p = geometry::project(c, {0, 0, 0});
  EXPECT_NEAR(p.x, 400.0, 1e-9);
  EXPECT_NEAR(p.y, 300.0, 1e-9);
  EXPECT_NEAR(c.to_camera({0, 0, 0}).z(), std::hypot(500.0, 300.0), 1e-9);
}

TEST(Skeleton, BoneLengthsAndSpeedCap) {
  const SkeletonConfig cfg;
  const auto traj = generate_skeleton_trajectory(300, cfg, 5);
  ASSERT_EQ(traj.size(), 300u);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    for (const auto& b : skeleton_bones()) {
      const double len =
          (traj[t][pose::index_of(b.child)].vec() - traj[t][pose::index_of(b.parent)].vec()).norm();
      EXPECT_NEAR(len, bone_length(b), 1e-9);
    }
    const auto root = traj[t][pose::index_of(pose::Keypoint::kBackMiddle)].vec();
    EXPECT_LE(root.head<2>().norm(), cfg.arena_radius + 1e-9);
    if (t > 0) {
      EXPECT_LE(max_displacement(traj[t - 1], traj[t]), cfg.velocity_cap + 1e-9);
    }
  }
}

TEST(Observations, FramesIndependentOfRange) {
  const auto rig = generate_rig(RigConfig{}, 4);
  const auto traj = generate_skeleton_trajectory(10, SkeletonConfig{}, 5);
  ObservationConfig oc;
  oc.occlusion = 0.2;
  const auto all = render_observations(traj, rig, oc, 9);
  const auto tail = render_observations({traj.begin() + 6, traj.end()}, rig, oc, 9, 6);
  for (long long f = 6; f < 10; ++f) {
    const auto& a = all.frames[static_cast<std::size_t>(f)];
    const auto& b = tail.frames[static_cast<std::size_t>(f - 6)];
    ASSERT_EQ(a.frame_index, b.frame_index);
    for (const auto& [view, obs] : a.views) {
      EXPECT_EQ(obs.centroids, b.views.at(view).centroids);
    }
    EXPECT_TRUE(all.truth.at(f).same_assignments(tail.truth.at(f)));
  }
}

TEST(Observations, TruthIsConsistentWithCentroids) {
  const auto rig = generate_rig(RigConfig{}, 4);
  const auto traj = generate_skeleton_trajectory(5, SkeletonConfig{}, 5);
  ObservationConfig oc;
  oc.noise_sigma = 0.0;
  const auto sim = render_observations(traj, rig, oc, 9);
  for (const auto& frame : sim.frames) {
    for (const auto& [view, obs] : frame.views) {
      const auto& va = sim.truth.at(frame.frame_index).views.at(view);
      EXPECT_TRUE(va.injective());
      std::set<int> used;
      for (auto k : pose::all_keypoints()) {
        if (!va[k].centroid) continue;
        used.insert(*va[k].centroid);
        const auto want = geometry::project(rig[std::stoul(view.substr(3))], sim.points.at(frame.frame_index)[pose::index_of(k)]);
        EXPECT_NEAR(obs.centroids[static_cast<std::size_t>(*va[k].centroid)].x, want.x, 1e-9);
      }
      EXPECT_EQ(used.size(), obs.centroids.size());
      EXPECT_TRUE(obs.crop.contains(obs.body_bbox));
    }
  }
}

TEST(Features, PlantedSegmentsPartitionAndAlternate) {
  const auto segs = plant_segments(3000, 10.0, 1.0, 5.0, 5, 3);
  long long at = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(segs[i].start, at);
    EXPECT_GE(segs[i].end - segs[i].start, 10);
    if (i > 0) {
      EXPECT_NE(segs[i].behavior, segs[i - 1].behavior);
    }
    at = segs[i].end;
  }
  EXPECT_EQ(at, 3000);
}

TEST(Features, SessionShapesAndTruth) {
  FeatureSessionConfig cfg;
  cfg.animals = {"x", "y"};
  cfg.frames = 200;
  const auto s = generate_feature_session(cfg, 1);
  ASSERT_EQ(s.sequences.size(), 2u);
  EXPECT_EQ(s.sequences[0].x.rows(), 200);
  EXPECT_EQ(s.sequences[0].x.cols(), 16);
  EXPECT_EQ(planted_labels(s.truth.planted.at("y")).size(), 200u);
  const auto back = behavior_truth_from_json(to_json(s.truth));
  EXPECT_EQ(back.planted.at("x").size(), s.truth.planted.at("x").size());
  EXPECT_EQ(back.vocabulary[2].label, s.truth.vocabulary[2].label);
}

TEST(Features, RejectsNonPartitioningPlan) {
  FeatureSessionConfig cfg;
  cfg.animals = {"x"};
  cfg.frames = 100;
  std::map<std::string, std::vector<PlantedSegment>> planted{{"x", {{0, 50, 0}, {60, 100, 1}}}};
  EXPECT_THROW(generate_feature_session(planted, cfg, 1), ValidationError);
}

}  // namespace
