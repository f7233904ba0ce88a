#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "../support/scene.hpp"
#include "etho/error.hpp"
#include "etho/perception/client.hpp"
#include "etho/pose/io.hpp"
#include "etho/pose/pipeline.hpp"
#include "etho/pose/stages.hpp"
#include "etho/util/text.hpp"

namespace {

using namespace etho;
using namespace etho::pose;
namespace fs = std::filesystem;
using perception::PerceptionClient;
using perception::ScriptedTransport;

PerceptionClient scripted(std::vector<std::string> replies) {
  return PerceptionClient(std::make_shared<ScriptedTransport>(std::move(replies)));
}

TEST(Schema, RegionsPartitionKeypoints) {
  std::set<Keypoint> seen;
  for (auto r : all_regions()) {
    for (auto k : region_keypoints(r)) {
      EXPECT_EQ(region_of(k), r);
      EXPECT_TRUE(seen.insert(k).second);
    }
  }
  EXPECT_EQ(seen.size(), kNumKeypoints);
}

TEST(Schema, NamesRoundTrip) {
  for (auto k : all_keypoints()) EXPECT_EQ(parse_keypoint(name_of(k)), k);
  for (auto r : all_regions()) EXPECT_EQ(parse_region(name_of(r)), r);
  EXPECT_EQ(name_of(Keypoint::kEarL), "ear_L");
  EXPECT_EQ(name_of(Keypoint::kTailTip), "tail_tip");
  EXPECT_FALSE(parse_keypoint("nose"));
}

TEST(Crop, PadsByFixedAndRelativeMargin) {
  const auto crop = compute_crop({100, 100, 200, 300}, {1000, 800});
  EXPECT_DOUBLE_EQ(crop.x0, 100 - 21.0);
  EXPECT_DOUBLE_EQ(crop.x1, 200 + 21.0);
  EXPECT_DOUBLE_EQ(crop.y0, 100 - 26.0);
  EXPECT_DOUBLE_EQ(crop.y1, 300 + 26.0);
}

TEST(Crop, ClampsAtImageCorner) {
  const auto crop = compute_crop({0, 0, 50, 50}, {1000, 800});
  EXPECT_DOUBLE_EQ(crop.x0, 0.0);
  EXPECT_DOUBLE_EQ(crop.y0, 0.0);
  const auto far = compute_crop({980, 780, 1000, 800}, {1000, 800});
  EXPECT_DOUBLE_EQ(far.x1, 1000.0);
  EXPECT_DOUBLE_EQ(far.y1, 800.0);
}

TEST(Crop, EmptyBoxRejected) { EXPECT_THROW(compute_crop({10, 10, 10, 40}, {100, 100}), EmptyBBox); }

TEST(Crop, ContainsBodyBox) {
  for (double x = 0; x < 900; x += 97) {
    const Rect b{x, x * 0.5, x + 80, x * 0.5 + 60};
    EXPECT_TRUE(compute_crop(b, {1000, 800}).contains(b));
  }
}

TEST(Assignment, InjectivityAndOwner) {
  ViewAssignment va;
  va[Keypoint::kEarL].centroid = 3;
  va[Keypoint::kEarR].centroid = 4;
  EXPECT_TRUE(va.injective());
  EXPECT_EQ(va.owner_of(4), Keypoint::kEarR);
  EXPECT_FALSE(va.owner_of(7));
  va[Keypoint::kTailTip].centroid = 3;
  EXPECT_FALSE(va.injective());
  AssignmentState st;
  st.views["c"] = va;
  EXPECT_THROW(st.validate_injective(), ValidationError);
}

class PoseSceneTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { scene_ = new etho::testing::Scene(etho::testing::make_scene(20, 1.0, 0.0, 31)); }
  static void TearDownTestSuite() { delete scene_; }
  static const etho::testing::Scene& scene() { return *scene_; }
  static etho::testing::Scene* scene_;
};
etho::testing::Scene* PoseSceneTest::scene_ = nullptr;

TEST_F(PoseSceneTest, WindowKeepsThreeMostRecent) {
  RollingWindow w(scene().seeds());
  EXPECT_TRUE(w.full());
  ExemplarFrame next = scene().seeds()[2];
  next.frame = scene().sim.frames[3];
  next.assignments = scene().sim.truth.at(3);
  w.push(next);
  ASSERT_EQ(w.entries().size(), 3u);
  EXPECT_EQ(w.entries().front().frame_index(), 1);
  EXPECT_EQ(w.latest().frame_index(), 3);
}

TEST_F(PoseSceneTest, WindowRejectsBadSeeds) {
  auto seeds = scene().seeds();
  EXPECT_THROW(RollingWindow({seeds[0], seeds[1]}), ValidationError);
  EXPECT_THROW(RollingWindow({seeds[1], seeds[0], seeds[2]}), ValidationError);
  auto bad = seeds;
  auto& va = bad[1].assignments.views.begin()->second;
  va[Keypoint::kEarR].centroid = va[Keypoint::kEarL].centroid;
  EXPECT_THROW(RollingWindow(std::move(bad)), ValidationError);
}

TEST_F(PoseSceneTest, RegionsFromAssignmentLieInCrop) {
  const auto& f = scene().sim.frames[4];
  for (const auto& [view, obs] : f.views) {
    const auto boxes = regions_from_assignment(obs, scene().sim.truth.at(4).views.at(view));
    for (auto r : all_regions()) {
      EXPECT_TRUE(obs.crop.contains(boxes[index_of(r)]));
      for (auto k : region_keypoints(r)) {
        const auto c = scene().sim.truth.at(4).views.at(view)[k].centroid;
        if (c) {
          EXPECT_TRUE(boxes[index_of(r)].contains(obs.centroids[static_cast<std::size_t>(*c)]));
        }
      }
    }
  }
}

TEST_F(PoseSceneTest, TablesRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "etho_pose_io_test";
  fs::create_directories(dir);
  std::string centroids(kCentroidsHeader), bboxes(kBBoxesHeader), labels(kLabelsHeader);
  centroids += '\n';
  bboxes += '\n';
  labels += '\n';
  for (int f = 0; f < 5; ++f) {
    centroids += centroid_rows(scene().sim.frames[f]);
    bboxes += bbox_rows(scene().sim.frames[f]);
    labels += label_rows(scene().sim.truth.at(f));
  }
  util::write_file(dir / "c.csv", centroids);
  util::write_file(dir / "b.csv", bboxes);
  util::write_file(dir / "l.csv", labels);
  const auto frames = read_frames(dir / "c.csv", dir / "b.csv", scene().cameras);
  const auto read = read_labels(dir / "l.csv");
  fs::remove_all(dir);
  ASSERT_EQ(frames.size(), 5u);
  for (int f = 0; f < 5; ++f) {
    const auto& want = scene().sim.frames[f];
    for (const auto& [view, obs] : want.views) {
      const auto& got = frames[f].views.at(view);
      ASSERT_EQ(got.centroids.size(), obs.centroids.size());
      for (std::size_t i = 0; i < obs.centroids.size(); ++i) EXPECT_EQ(got.centroids[i], obs.centroids[i]);
      EXPECT_EQ(got.crop, obs.crop);
    }
    EXPECT_TRUE(read.at(f).same_assignments(scene().sim.truth.at(f)));
  }
}

TEST(PoseIo, UnknownKeypointNamedInError) {
  const fs::path p = fs::temp_directory_path() / "etho_bad_labels.csv";
  util::write_file(p, std::string(kLabelsHeader) + "\n0,cam0,nose,1\n");
  try {
    read_labels(p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nose"), std::string::npos);
  }
  fs::remove(p);
}

TEST(Prompt, RendersKnownFieldsOnly) {
  EXPECT_EQ(render_prompt("cam {view} {n} {missing}", {{"view", "c1"}, {"n", 3}}), "cam c1 3 {missing}");
}

// --- stages with scripted replies ------------------------------------------------

TEST_F(PoseSceneTest, RegionDetectClampsToCrop) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  const std::string reply = "{\"box\": [" + util::fmt_double(obs.crop.x0 - 50) + ", " +
                            util::fmt_double(obs.crop.y0 + 1) + ", " + util::fmt_double(obs.crop.x0 + 30) + ", " +
                            util::fmt_double(obs.crop.y0 + 40) + "]}";
  const auto client = scripted({reply});
  const auto det = detect_regions(obs, w, client, 2);
  EXPECT_EQ(det.report.calls, 4);
  EXPECT_FALSE(det.report.degraded);
  EXPECT_DOUBLE_EQ(det.boxes[0].x0, obs.crop.x0);
  EXPECT_FALSE(det.report.warnings.empty());
}

TEST_F(PoseSceneTest, RegionDetectFallsBackToPreviousBox) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam1");
  const auto client = scripted({"!unavailable"});
  const auto det = detect_regions(obs, w, client, 2);
  EXPECT_TRUE(det.report.degraded);
  EXPECT_EQ(det.report.unavailable, 4);
  const auto& prev = w.latest();
  const auto& pv = prev.frame.views.at("cam1");
  const auto want = prev.regions.at("cam1")[0].translated(obs.crop.x0 - pv.crop.x0, obs.crop.y0 - pv.crop.y0)
                        .clamped_to(obs.crop);
  EXPECT_EQ(det.boxes[0], want);
}

TEST_F(PoseSceneTest, AssignWithoutCandidatesSkipsClient) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  auto transport = std::make_shared<ScriptedTransport>(std::vector<std::string>{"{}"});
  PerceptionClient client(transport);
  const Rect nowhere{-100, -100, -90, -90};
  const auto res = assign_within_region("ears", region_keypoints(Region::kEars), nowhere, obs, w, client, 2);
  EXPECT_EQ(res.report.calls, 0);
  EXPECT_TRUE(transport->seen().empty());
  for (const auto& [k, v] : res.assignment) EXPECT_FALSE(v);
}

TEST_F(PoseSceneTest, AssignRetriesAfterInvalidReply) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  const auto& truth = scene().sim.truth.at(3).views.at("cam0");
  const int l = *truth[Keypoint::kEarL].centroid, r = *truth[Keypoint::kEarR].centroid;
  const std::string dup = "{\"assignments\": {\"ear_L\": " + std::to_string(l) + ", \"ear_R\": " + std::to_string(l) + "}}";
  const std::string good = "{\"assignments\": {\"ear_L\": " + std::to_string(l) + ", \"ear_R\": " + std::to_string(r) + "}}";
  auto transport = std::make_shared<ScriptedTransport>(std::vector<std::string>{dup, good});
  PerceptionClient client(transport);
  const auto res = assign_within_region("ears", region_keypoints(Region::kEars), obs.crop, obs, w, client, 2);
  EXPECT_EQ(res.report.retries, 1);
  EXPECT_FALSE(res.flagged);
  EXPECT_EQ(res.assignment.at(Keypoint::kEarL), l);
  EXPECT_EQ(res.assignment.at(Keypoint::kEarR), r);
  const auto seen = transport->seen();
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_NE(seen[1].prompt.find("duplicate centroid"), std::string::npos);
}

TEST_F(PoseSceneTest, AssignFailureFlagsRegion) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  const auto client = scripted({"not json at all"});
  const auto res = assign_within_region("tail", region_keypoints(Region::kTail), obs.crop, obs, w, client, 1);
  EXPECT_TRUE(res.flagged);
  EXPECT_EQ(res.report.schema_failures, 1);
  for (const auto& [k, v] : res.assignment) EXPECT_FALSE(v);
}

TEST_F(PoseSceneTest, ReconcileConflictFallbackKeepsEarliest) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  const auto& truth = scene().sim.truth.at(3).views.at("cam0");
  std::vector<PartialAssignment> parts;
  for (auto r : all_regions()) {
    PartialAssignment p;
    for (auto k : region_keypoints(r)) p[k] = truth[k].centroid;
    parts.push_back(p);
  }
  parts[0][Keypoint::kEarR] = truth[Keypoint::kEarL].centroid;
  const auto client = scripted({"!unavailable"});
  const auto rec = reconcile_frame(parts, obs, w, client, 2);
  EXPECT_TRUE(rec.client_invoked);
  EXPECT_EQ(rec.assignment[Keypoint::kEarL].centroid, truth[Keypoint::kEarL].centroid);
  EXPECT_FALSE(rec.assignment[Keypoint::kEarR].centroid);
  EXPECT_TRUE(rec.assignment[Keypoint::kEarR].flagged);
  EXPECT_TRUE(rec.assignment.injective());
}

TEST_F(PoseSceneTest, ReconcileSkippedWhenConsistent) {
  RollingWindow w(scene().seeds());
  const auto& obs = scene().sim.frames[3].views.at("cam0");
  const auto& truth = scene().sim.truth.at(3).views.at("cam0");
  std::vector<PartialAssignment> parts(1);
  for (auto k : all_keypoints()) parts[0][k] = truth[k].centroid;
  auto transport = std::make_shared<ScriptedTransport>(std::vector<std::string>{"!unavailable"});
  PerceptionClient client(transport);
  const auto rec = reconcile_frame(parts, obs, w, client, 2);
  EXPECT_FALSE(rec.client_invoked);
  EXPECT_TRUE(transport->seen().empty());
}

// --- pipeline ------------------------------------------------------------------

TEST_F(PoseSceneTest, OracleRunRecoversTruth) {
  perception::PerceptionClient client(
      std::make_shared<perception::OracleTransport>(scene().truth, perception::CorruptionSpec{}));
  PoseRunConfig cfg;
  const auto outs = run_sequence(scene().after_seeds(), scene().seeds(), scene().cameras, cfg, client);
  ASSERT_EQ(outs.size(), scene().after_seeds().size());
  for (const auto& o : outs) {
    EXPECT_TRUE(o.assignments.same_assignments(scene().sim.truth.at(o.frame_index))) << "frame " << o.frame_index;
    EXPECT_FALSE(o.report.degraded);
    EXPECT_TRUE(o.window_updated);
  }
}

TEST_F(PoseSceneTest, UnavailableClientDegradesWithoutThrowing) {
  const auto client = scripted({"!unavailable"});
  PoseRunConfig cfg;
  const auto frames = scene().after_seeds();
  const auto outs = run_sequence({frames.begin(), frames.begin() + 2}, scene().seeds(), scene().cameras, cfg, client);
  for (const auto& o : outs) {
    EXPECT_TRUE(o.report.degraded);
    EXPECT_GT(o.report.unavailable, 0);
    for (const auto& q : o.qc) EXPECT_EQ(q.verdict, consensus::Verdict::kFlag);
  }
}

TEST(FrameQc, DegradedAndFlaggedSlots) {
  std::vector<consensus::KeypointResult> est;
  for (auto k : all_keypoints()) {
    consensus::KeypointResult r;
    r.keypoint = k;
    r.status = "insufficient-views";
    est.push_back(r);
  }
  AssignmentState st;
  st.views["c"][Keypoint::kEarL].flagged = true;
  const auto qc = frame_qc(est, st, false, 10.0);
  EXPECT_NE(qc[0].reason.find("assignment-flag"), std::string::npos);
  EXPECT_EQ(qc[1].reason.find("assignment-flag"), std::string::npos);
  const auto deg = frame_qc(est, st, true, 10.0);
  for (const auto& q : deg) EXPECT_NE(q.reason.find("degraded-frame"), std::string::npos);
}

TEST(Ablation, Names) {
  for (auto a : {Ablation::kFull, Ablation::kNoRefine, Ablation::kNaive}) EXPECT_EQ(parse_ablation(name_of(a)), a);
  EXPECT_FALSE(parse_ablation("partial"));
}

}  // namespace
