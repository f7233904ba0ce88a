#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "etho/error.hpp"
#include "etho/geometry/calibration_io.hpp"
#include "etho/geometry/triangulation.hpp"
#include "etho/synth/rig.hpp"

namespace {

using namespace etho;
using namespace etho::geometry;

CameraModel simple_camera() {
  CameraModel c;
  c.name = "c";
  c.intrinsics << 1000, 0, 500, 0, 1000, 400, 0, 0, 1;
  c.translation = {0, 0, 1000};
  c.image_size = {1000, 800};
  return c;
}

TEST(Camera, ProjectsThroughPrincipalPoint) {
  const auto c = simple_camera();
  const auto p = project(c, {0, 0, 0});
  EXPECT_DOUBLE_EQ(p.x, 500.0);
  EXPECT_DOUBLE_EQ(p.y, 400.0);
  const auto q = project(c, {100, -50, 0});
  EXPECT_NEAR(q.x, 600.0, 1e-9);
  EXPECT_NEAR(q.y, 350.0, 1e-9);
}

TEST(Camera, PointBehindCameraThrows) {
  const auto c = simple_camera();
  EXPECT_THROW(project(c, {0, 0, -1000}), DegenerateDepth);
  EXPECT_THROW(project(c, {0, 0, -2000}), DegenerateDepth);
}

TEST(Camera, ReprojectionErrorIsPixelDistance) {
  const auto c = simple_camera();
  EXPECT_NEAR(reprojection_error(c, {0, 0, 0}, {503, 404}), 5.0, 1e-12);
}

TEST(Camera, ValidateRejectsNonRotation) {
  auto c = simple_camera();
  EXPECT_NO_THROW(c.validate());
  c.rotation(0, 0) = 2.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = simple_camera();
  c.intrinsics(2, 2) = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Camera, InImageBounds) {
  const auto c = simple_camera();
  EXPECT_TRUE(c.in_image({0, 0}));
  EXPECT_TRUE(c.in_image({999.5, 799.5}));
  EXPECT_FALSE(c.in_image({-0.5, 10}));
  EXPECT_FALSE(c.in_image({10, 800.5}));
}

TEST(Calibration, RoundTripsThroughJson) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 5);
  const auto back = parse_calibration(calibration_to_json(rig));
  ASSERT_EQ(back.size(), rig.size());
  for (std::size_t i = 0; i < rig.size(); ++i) {
    EXPECT_EQ(back[i].name, rig[i].name);
    EXPECT_TRUE(back[i].rotation.isApprox(rig[i].rotation, 1e-15));
    EXPECT_TRUE(back[i].translation.isApprox(rig[i].translation, 1e-15));
    EXPECT_EQ(back[i].image_size, rig[i].image_size);
  }
}

TEST(Calibration, FileRoundTrip) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 6);
  const auto path = std::filesystem::temp_directory_path() / "etho_calib_test.json";
  write_calibration(path, rig);
  const auto back = read_calibration(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), rig.size());
  EXPECT_TRUE(back[3].intrinsics.isApprox(rig[3].intrinsics));
}

TEST(Calibration, RejectsMissingAndUnknownKeys) {
  auto doc = calibration_to_json(synth::generate_rig(synth::RigConfig{}, 5));
  auto missing = doc;
  missing["cameras"][2].erase("rotation");
  try {
    parse_calibration(missing);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rotation"), std::string::npos);
  }
  auto unknown = doc;
  unknown["cameras"][0]["distortion"] = {0.1, 0.0};
  EXPECT_THROW(parse_calibration(unknown), ConfigError);
  auto dup = doc;
  dup["cameras"][1]["name"] = dup["cameras"][0]["name"];
  EXPECT_ANY_THROW(parse_calibration(dup));
}

TEST(Triangulation, ExactRecoveryOnRig) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 9);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-120.0, 120.0);
  for (int i = 0; i < 50; ++i) {
    const WorldPoint x{u(rng), u(rng), 0.25 * std::abs(u(rng))};
    std::vector<Observation> obs;
    for (const auto& c : rig) obs.push_back({std::cref(c), project(c, x)});
    const auto got = triangulate_dlt(obs);
    EXPECT_NEAR((got.vec() - x.vec()).norm(), 0.0, 1e-8);
  }
}

TEST(Triangulation, TwoViewsSuffice) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 9);
  const WorldPoint x{10, 20, 30};
  std::vector<Observation> obs{{std::cref(rig[0]), project(rig[0], x)}, {std::cref(rig[2]), project(rig[2], x)}};
  EXPECT_NEAR((triangulate_dlt(obs).vec() - x.vec()).norm(), 0.0, 1e-8);
}

TEST(Triangulation, RejectsTooFewViews) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 9);
  std::vector<Observation> one{{std::cref(rig[0]), {1000, 700}}};
  EXPECT_THROW(triangulate_dlt(one), InsufficientViews);
  EXPECT_THROW(triangulate_dlt({}), InsufficientViews);
}

TEST(Triangulation, CoincidentCamerasAreDegenerate) {
  const auto c = simple_camera();
  std::vector<Observation> obs{{std::cref(c), {520, 410}}, {std::cref(c), {520, 410}}};
  EXPECT_THROW(triangulate_dlt(obs), DegenerateGeometry);
}

TEST(Triangulation, InvariantUnderObservationOrder) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 3);
  const WorldPoint x{-40, 15, 22};
  std::vector<Observation> obs;
  for (const auto& c : rig) {
    auto p = project(c, x);
    p.x += 0.7;
    obs.push_back({std::cref(c), p});
  }
  const auto a = triangulate_dlt(obs);
  std::reverse(obs.begin(), obs.end());
  const auto b = triangulate_dlt(obs);
  EXPECT_NEAR((a.vec() - b.vec()).norm(), 0.0, 1e-9);
}

}  // namespace
