#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "etho/behavior/dec.hpp"
#include "etho/behavior/metrics.hpp"
#include "etho/behavior/segments.hpp"
#include "etho/behavior/semantics.hpp"
#include "etho/behavior/timeline.hpp"
#include "etho/error.hpp"
#include "etho/perception/client.hpp"
#include "etho/synth/features.hpp"

namespace {

using namespace etho;
using namespace etho::behavior;
using Eigen::MatrixXd;
namespace fs = std::filesystem;

MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 2.0);
  MatrixXd m(r, c);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// --- DEC ---------------------------------------------------------------------------

TEST(Dec, SoftAssignRowsAreDistributions) {
  const auto q = soft_assign(random_matrix(50, 4, 1), random_matrix(5, 4, 2), 1.0);
  for (int i = 0; i < q.rows(); ++i) {
    EXPECT_NEAR(q.row(i).sum(), 1.0, 1e-12);
    EXPECT_GT(q.row(i).minCoeff(), 0.0);
  }
}

TEST(Dec, SoftAssignMatchesStudentKernel) {
  MatrixXd x(1, 1), mu(2, 1);
  x << 0.0;
  mu << 1.0, 3.0;
  const auto q = soft_assign(x, mu, 1.0);
  // (1 + d^2)^-1 for d = 1 and d = 3: 1/2 and 1/10.
  EXPECT_NEAR(q(0, 0), 0.5 / 0.6, 1e-12);
  EXPECT_NEAR(q(0, 1), 0.1 / 0.6, 1e-12);
}

TEST(Dec, TargetMatchesDefinition) {
  const auto q = soft_assign(random_matrix(40, 3, 3), random_matrix(4, 3, 4));
  const auto p = target_distribution(q);
  for (int i = 0; i < p.rows(); ++i) {
    double z = 0.0;
    for (int k = 0; k < q.cols(); ++k) z += q(i, k) * q(i, k) / q.col(k).sum();
    for (int k = 0; k < q.cols(); ++k) EXPECT_NEAR(p(i, k), q(i, k) * q(i, k) / q.col(k).sum() / z, 1e-12);
  }
  EXPECT_NEAR(kl_divergence(q, q), 0.0, 1e-12);
  EXPECT_GT(kl_divergence(p, q), 0.0);
}

TEST(Dec, TargetSharpensBalancedClusters) {
  // Mirrored rows give equal column sums, so only the square acts.
  MatrixXd q(2, 2);
  q << 0.7, 0.3, 0.3, 0.7;
  const auto p = target_distribution(q);
  EXPECT_NEAR(p(0, 0), 0.49 / 0.58, 1e-12);
  EXPECT_GT(p(0, 0), q(0, 0));
  EXPECT_GT(p(1, 1), q(1, 1));
}

TEST(Dec, DeadClusterDetected) {
  MatrixXd q = MatrixXd::Zero(3, 2);
  q.col(0).setOnes();
  EXPECT_THROW(target_distribution(q), DegenerateCluster);
}

TEST(Dec, GradientMatchesFiniteDifferences) {
  const MatrixXd x = random_matrix(30, 3, 5);
  const MatrixXd mu = random_matrix(4, 3, 6);
  for (double alpha : {1.0, 2.5}) {
    const MatrixXd p = target_distribution(soft_assign(x, mu, alpha));
    const MatrixXd g = kl_gradient(x, mu, p, alpha);
    const double h = 1e-6;
    for (int j = 0; j < mu.rows(); ++j) {
      for (int d = 0; d < mu.cols(); ++d) {
        MatrixXd up = mu, dn = mu;
        up(j, d) += h;
        dn(j, d) -= h;
        const double num =
            (kl_divergence(p, soft_assign(x, up, alpha)) - kl_divergence(p, soft_assign(x, dn, alpha))) / (2 * h);
        EXPECT_NEAR(g(j, d), num, 1e-6 * std::max(1.0, std::abs(num)));
      }
    }
  }
}

TEST(Dec, RejectsBadConfig) {
  DecConfig c;
  c.k = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.alpha = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Dec, TooFewDistinctFrames) {
  FeatureSequence s{"a", 10.0, MatrixXd::Ones(20, 2)};
  DecConfig c;
  c.k = 3;
  EXPECT_THROW(dec_fit(std::vector<FeatureSequence>{s}, c), DegenerateCluster);
}

TEST(Dec, FitIsDeterministicAndMonotone) {
  synth::FeatureSessionConfig cfg;
  cfg.frames = 400;
  const auto session = synth::generate_feature_session(cfg, 9);
  DecConfig dc;
  dc.k = 6;
  dc.seed = 2;
  dc.epochs = 60;
  const auto a = dec_fit(session.sequences, dc);
  const auto b = dec_fit(session.sequences, dc);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.trace, b.trace);
  ASSERT_EQ(a.trace.size(), 60u);
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1] + dc.tolerance);
}

// --- segments ------------------------------------------------------------------------

TEST(Segments, RunLengthEncoding) {
  const auto segs = segments_from_labels("m", {0, 0, 1, 1, 1, 0}, 10.0);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], (ClipSegment{"m", 0, 2, 0, 0.2}));
  EXPECT_EQ(segs[1], (ClipSegment{"m", 2, 5, 1, 0.3}));
  EXPECT_EQ(segs[2].start, 5);
  EXPECT_EQ(segs[2].end, 6);
  EXPECT_EQ(labels_from_segments(segs), (std::vector<int>{0, 0, 1, 1, 1, 0}));
}

TEST(Segments, HardLabelTiesGoLow) {
  MatrixXd q(2, 3);
  q << 0.4, 0.4, 0.2, 0.2, 0.4, 0.4;
  EXPECT_EQ(hard_labels(q), (std::vector<int>{0, 1}));
}

TEST(Segments, BlipAbsorbed) {
  std::vector<int> labels(30, 2);
  labels[12] = 5;
  const auto segs = absorb_short_runs(segments_from_labels("m", labels, 10.0), 0.5, 10.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].cluster, 2);
  EXPECT_EQ(segs[0].length(), 30);
}

TEST(Segments, ShortRunJoinsLongerNeighbour) {
  // 10 x A, 2 x B, 4 x C: B joins A.
  std::vector<int> labels;
  labels.insert(labels.end(), 10, 0);
  labels.insert(labels.end(), 2, 1);
  labels.insert(labels.end(), 6, 2);
  const auto segs = absorb_short_runs(segments_from_labels("m", labels, 10.0), 0.5, 10.0);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].end, 12);
  EXPECT_EQ(segs[1].cluster, 2);
}

TEST(Segments, FirstRunMergesForward) {
  std::vector<int> labels{3, 3};
  labels.insert(labels.end(), 20, 1);
  const auto segs = absorb_short_runs(segments_from_labels("m", labels, 10.0), 0.5, 10.0);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].cluster, 1);
}

TEST(Segments, PartitionValidation) {
  EXPECT_THROW(validate_partition({}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{"m", 0, 3, 0, 0}, {"m", 4, 5, 1, 0}}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{"m", 0, 3, 0, 0}, {"m", 2, 5, 1, 0}}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{"m", 0, 3, 0, 0}, {"m", 3, 5, 0, 0}}, 5), ValidationError);
  EXPECT_THROW(validate_partition({{"m", 0, 3, 0, 0}}, 5), ValidationError);
  EXPECT_NO_THROW(validate_partition({{"m", 0, 3, 0, 0}, {"m", 3, 5, 1, 0}}, 5));
}

TEST(Segments, PropertiesOnRandomSequences) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> labels(2 + rng() % 80);
    for (auto& l : labels) l = static_cast<int>(rng() % 3);
    const auto segs = segments_from_labels("m", labels, 10.0);
    validate_partition(segs, static_cast<long long>(labels.size()));
    EXPECT_EQ(labels_from_segments(segs), labels);
    const double md = 0.1 * static_cast<double>(rng() % 6);
    const auto smooth = absorb_short_runs(segs, md, 10.0);
    validate_partition(smooth, static_cast<long long>(labels.size()));
    if (smooth.size() > 1) {
      for (const auto& s : smooth) EXPECT_GE(static_cast<double>(s.length()) / 10.0, md - 1e-9);
    }
  }
}

TEST(Segments, TableRoundTrip) {
  const auto segs = segments_from_labels("m1", {0, 0, 4, 4, 4, 1}, 10.0);
  const fs::path p = fs::temp_directory_path() / "etho_segments_test.csv";
  std::ofstream(p) << kSegmentsHeader << "\n" << segment_rows(segs);
  EXPECT_EQ(read_segments(p, 10.0), segs);
  fs::remove(p);
}

// --- metrics --------------------------------------------------------------------------

TEST(Metrics, AdjustedRandIndex) {
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 7, 7}), 1.0);
  // Textbook example: ARI of {0,0,0,1,1,1} vs {0,0,1,1,2,2} is 0.24242...
  EXPECT_NEAR(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}), 8.0 / 33.0, 1e-12);
}

TEST(Metrics, BoundaryRecall) {
  EXPECT_EQ(boundaries({0, 0, 1, 1, 2}), (std::vector<long long>{2, 4}));
  EXPECT_DOUBLE_EQ(boundary_recall({10, 20}, {12, 40}, 3), 0.5);
  EXPECT_DOUBLE_EQ(boundary_recall({}, {1}, 3), 1.0);
}

// --- features --------------------------------------------------------------------------

TEST(Features, FileRoundTrip) {
  std::vector<FeatureSequence> seqs{{"a", 10.0, random_matrix(5, 3, 1)}, {"b", 10.0, random_matrix(5, 3, 2)}};
  const fs::path p = fs::temp_directory_path() / "etho_features_test.txt";
  write_features(p, seqs);
  const auto back = read_features(p);
  fs::remove(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].animal, "b");
  EXPECT_EQ(back[0].x, seqs[0].x);
}

TEST(Features, SessionValidation) {
  std::vector<FeatureSequence> seqs{{"a", 10.0, random_matrix(5, 3, 1)}, {"a", 10.0, random_matrix(5, 3, 2)}};
  EXPECT_THROW(validate_session(seqs), ValidationError);
  seqs[1].animal = "b";
  seqs[1].x = random_matrix(6, 3, 2);
  EXPECT_THROW(validate_session(seqs), ValidationError);
  seqs[1].x(0, 0) = std::nan("");
  EXPECT_THROW(seqs[1].validate(), ValidationError);
}

// --- semantics ---------------------------------------------------------------------------

TEST(Semantics, DownsampleUniform) {
  EXPECT_EQ(downsample_frames(0, 30, 30.0, 10.0), (std::vector<long long>{0, 3, 6, 9, 12, 15, 18, 21, 24, 27}));
  EXPECT_EQ(downsample_frames(5, 8, 10.0, 10.0), (std::vector<long long>{5, 6, 7}));
  EXPECT_EQ(downsample_frames(0, 1, 30.0, 10.0), (std::vector<long long>{0}));
  EXPECT_THROW(downsample_frames(3, 3, 10.0, 10.0), ValidationError);
}

ClipCaption caption(int id, long long start, long long end, std::string label) {
  ClipCaption c;
  c.clip = {"m", start, end, id % 3, static_cast<double>(end - start) / 10.0};
  c.clip_id = id;
  c.label = std::move(label);
  c.description = "d" + std::to_string(id);
  return c;
}

TEST(Semantics, CaptionFailureMarksUncaptioned) {
  perception::PerceptionClient client(
      std::make_shared<perception::ScriptedTransport>(std::vector<std::string>{R"({"label": ""})"}));
  const auto c = caption_clip({"m", 0, 20, 1, 2.0}, 0, 10.0, CaptionConfig{}, client);
  EXPECT_TRUE(c.uncaptioned);
  EXPECT_EQ(c.label, kUncaptionedLabel);
  EXPECT_EQ(c.attempts, 3);
  EXPECT_EQ(c.frames.size(), 20u);
}

TEST(Semantics, CaptionUnavailablePropagates) {
  perception::PerceptionClient client(std::make_shared<perception::UnavailableTransport>());
  EXPECT_THROW(caption_clip({"m", 0, 20, 1, 2.0}, 0, 10.0, CaptionConfig{}, client), ClientUnavailable);
}

TEST(Semantics, LabelFallbackGroups) {
  const std::vector<ClipCaption> caps{caption(0, 0, 5, "a"), caption(1, 5, 9, "a"), caption(2, 9, 20, "b"),
                                      caption(3, 20, 22, "a")};
  const auto m = merge_by_label(caps);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].members, (std::vector<int>{0, 1}));
  EXPECT_EQ(m[0].end, 9);
  EXPECT_TRUE(m[2].fallback);
}

TEST(Semantics, EpochsOverlapByOneClip) {
  std::vector<ClipCaption> caps;
  for (int i = 0; i < 10; ++i) caps.push_back(caption(i, i * 100, (i + 1) * 100, "a"));
  // 10 s clips, 30 s epochs: [0,2] [2,4] [4,6] [6,8] [8,9]
  const auto e = merge_epochs(caps, 10.0, 30.0);
  ASSERT_EQ(e.size(), 5u);
  EXPECT_EQ(e[0], (std::pair<std::size_t, std::size_t>{0, 2}));
  EXPECT_EQ(e[1].first, 2u);
  EXPECT_EQ(e.back().second, 9u);
  // A clip longer than an epoch still forms its own epoch.
  const auto single = merge_epochs(caps, 10.0, 5.0);
  EXPECT_EQ(single.size(), 10u);
}

TEST(Semantics, MergeChainsAcrossEpochs) {
  std::vector<ClipCaption> caps;
  for (int i = 0; i < 6; ++i) caps.push_back(caption(i, i * 100, (i + 1) * 100, i < 4 ? "walk" : "rest"));
  perception::PerceptionClient client(std::make_shared<perception::ScriptedTransport>(std::vector<std::string>{
      R"({"segments": [{"clips": [0, 1, 2], "label": "walking", "description": "w"}]})",
      R"({"segments": [{"clips": [2, 3], "label": "walking", "description": "w2"}, {"clips": [4], "label": "resting", "description": "r"}]})",
      R"({"segments": [{"clips": [4, 5], "label": "resting", "description": "r2"}]})"}));
  MergeConfig mc;
  mc.epoch_seconds = 30.0;
  MergeReport rep;
  const auto m = merge_segments(caps, 10.0, mc, client, &rep);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].members, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(m[0].description, "w");
  EXPECT_EQ(m[1].members, (std::vector<int>{4, 5}));
  EXPECT_EQ(m[1].end, 600);
  EXPECT_EQ(rep.calls, 3);
  EXPECT_EQ(rep.fallbacks, 0);
}

TEST(Semantics, MergeRejectsNonContiguousClips) {
  const std::vector<ClipCaption> caps{caption(0, 0, 5, "a"), caption(1, 6, 9, "a")};
  perception::PerceptionClient client(std::make_shared<perception::UnavailableTransport>());
  EXPECT_THROW(merge_segments(caps, 10.0, MergeConfig{}, client), ValidationError);
}

TEST(Semantics, UnavailableMergeFallsBack) {
  const std::vector<ClipCaption> caps{caption(0, 0, 5, "a"), caption(1, 5, 9, "b")};
  perception::PerceptionClient client(std::make_shared<perception::UnavailableTransport>());
  MergeReport rep;
  const auto m = merge_segments(caps, 10.0, MergeConfig{}, client, &rep);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(rep.unavailable, 1);
  EXPECT_EQ(rep.fallbacks, 1);
}

// --- timeline ------------------------------------------------------------------------------

AnimalTimeline small_animal() {
  AnimalTimeline a;
  a.frames = 20;
  a.clips = {caption(0, 0, 5, "a"), caption(1, 5, 12, "a"), caption(2, 12, 20, "b")};
  a.segments = merge_by_label(a.clips);
  return a;
}

TEST(Timeline, JsonRoundTrip) {
  const auto tl = build_timeline({{"m", small_animal()}}, 10.0, {{"seed", 3}});
  const auto back = timeline_from_json(to_json(tl));
  EXPECT_EQ(to_json(back), to_json(tl));
  EXPECT_EQ(back.animals.at("m").segments, tl.animals.at("m").segments);
}

TEST(Timeline, DetectsViolations) {
  auto gap = small_animal();
  gap.segments.back().end = 19;
  gap.frames = 20;
  try {
    build_timeline({{"m", gap}}, 10.0);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("non-covering"), std::string::npos);
  }
  auto overlap = small_animal();
  overlap.segments[1].start = 8;
  EXPECT_THROW(build_timeline({{"m", overlap}}, 10.0), ValidationError);
  auto lineage = small_animal();
  lineage.segments[0].members = {0};
  EXPECT_THROW(build_timeline({{"m", lineage}}, 10.0), ValidationError);
}

TEST(Timeline, TableHasOneRowPerSegment) {
  const auto tl = build_timeline({{"m", small_animal()}}, 10.0);
  const auto table = timeline_table(tl);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_EQ(table.rfind(std::string(kTimelineTableHeader), 0), 0u);
}

TEST(Timeline, CaptionRecordRoundTrip) {
  auto c = caption(4, 10, 30, "sniffing the floor");
  c.frames = downsample_frames(10, 30, 10.0, 10.0);
  c.attempts = 2;
  const auto back = caption_from_json(to_json(c), 10.0);
  EXPECT_EQ(back.clip, c.clip);
  EXPECT_EQ(back.label, c.label);
  EXPECT_EQ(back.frames, c.frames);
  EXPECT_EQ(back.attempts, 2);
}

}  // namespace
