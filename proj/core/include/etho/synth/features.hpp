#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/behavior/features.hpp"
#include "etho/perception/oracle.hpp"

namespace etho::synth {

using perception::BehaviorTruth;
using perception::PlantedSegment;

struct FeatureSessionConfig {
  std::vector<std::string> animals{"A0", "A1", "A2"};
  long long frames = 3000;
  double fps = 10.0;
  int dim = 16;
  int behaviors = 5;
  double min_segment_s = 1.0;
  double max_segment_s = 5.0;
  double separation = 6.0;  // std of the behavior centres per dimension
  double noise = 1.0;       // std of frame noise per dimension

  void validate() const;
};

struct FeatureSession {
  std::vector<behavior::FeatureSequence> sequences;
  BehaviorTruth truth;
  Eigen::MatrixXd centers;  // behaviors x dim
};

// Back-to-back segments with durations uniform in [min, max] seconds and
// behaviors differing between neighbours. A short tail is absorbed by the
// previous segment.
std::vector<PlantedSegment> plant_segments(long long frames, double fps, double min_s, double max_s, int behaviors,
                                           std::uint64_t seed);

// Frames sample the planted behavior's centre plus Gaussian noise. The
// planted segments must partition [0, frames) for every animal.
FeatureSession generate_feature_session(const std::map<std::string, std::vector<PlantedSegment>>& planted,
                                        const FeatureSessionConfig& config, std::uint64_t seed);

// Plants segments for every configured animal, then generates features.
FeatureSession generate_feature_session(const FeatureSessionConfig& config, std::uint64_t seed);

// Built-in labels, caption wordings and descriptions, cycled by behavior id.
std::vector<perception::BehaviorVocabulary> default_vocabulary(int behaviors);

std::vector<int> planted_labels(const std::vector<PlantedSegment>& planted);

nlohmann::json to_json(const BehaviorTruth& truth);
BehaviorTruth behavior_truth_from_json(const nlohmann::json& doc);

}  // namespace etho::synth
