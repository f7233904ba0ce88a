#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "etho/perception/client.hpp"

namespace etho::perception {

struct PoseTruth {
  // (frame, view) -> keypoint name -> centroid index, visible keypoints only.
  std::map<std::pair<long long, std::string>, std::map<std::string, int>> assignments;
  // (frame, view, region) -> region box x0, y0, x1, y1.
  std::map<std::tuple<long long, std::string, std::string>, std::array<double, 4>> regions;
};

struct PlantedSegment {
  long long start = 0;
  long long end = 0;  // exclusive
  int behavior = 0;
};

struct BehaviorVocabulary {
  std::string label;                  // refined label returned by merge
  std::vector<std::string> variants;  // per-clip caption wordings
  std::string description;
};

struct BehaviorTruth {
  std::map<std::string, std::vector<PlantedSegment>> planted;  // per animal
  std::vector<BehaviorVocabulary> vocabulary;                  // indexed by behavior id
};

struct GroundTruth {
  PoseTruth pose;
  BehaviorTruth behavior;
};

// Seeded answer corruption. Every draw is keyed on (seed, frame, view,
// region, task) so the pattern does not depend on call order.
struct CorruptionSpec {
  double p_swap = 0.0;      // per keypoint: exchange label with another keypoint in the request
  double box_jitter = 0.0;  // uniform +-amplitude (px) on each region box coordinate
  double p_drop = 0.0;      // per keypoint: answer "unassigned"
  std::uint64_t seed = 0;

  void validate() const;
};

struct InjectedSwap {
  long long frame = 0;
  std::string view;
  std::string first;
  std::string second;
};

// Answers every task from ground-truth tables. Reconciliation only touches
// keypoints named in the request's conflict and gap lists.
class OracleTransport : public Transport {
 public:
  OracleTransport(std::shared_ptr<const GroundTruth> truth, CorruptionSpec corruption);

  std::string complete(const PerceptionRequest& request) override;

  std::vector<InjectedSwap> injected_swaps() const;

 private:
  nlohmann::json region_box(const nlohmann::json& ctx) const;
  nlohmann::json assign(const nlohmann::json& ctx);
  nlohmann::json reconcile(const nlohmann::json& ctx) const;
  nlohmann::json caption(const nlohmann::json& ctx) const;
  nlohmann::json merge(const nlohmann::json& ctx) const;

  const std::map<std::string, int>& truth_for(long long frame, const std::string& view) const;

  std::shared_ptr<const GroundTruth> truth_;
  CorruptionSpec corruption_;
  mutable std::mutex mu_;
  std::vector<InjectedSwap> injected_;
};

// Index of the planted segment overlapping [start, end) the most (earliest on ties).
std::size_t majority_segment(const std::vector<PlantedSegment>& planted, long long start, long long end);

}  // namespace etho::perception
