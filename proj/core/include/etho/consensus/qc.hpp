#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etho/consensus/refine.hpp"

namespace etho::consensus {

enum class Verdict { kAccept, kFlag };

struct QcRecord {
  Keypoint keypoint = Keypoint::kEarL;
  Verdict verdict = Verdict::kAccept;
  std::string reason;  // empty on accept; otherwise ';'-joined reasons
  double mean_error = 0.0;
  int inliers = 0;
  // Assigned views whose individual error exceeds tau_qc.
  std::vector<std::string> suspect_views;
};

inline constexpr int kMinQcInliers = 3;

// Flags a keypoint when it could not be triangulated ("no-consensus" or
// "insufficient-views"), when its mean inlier error exceeds tau_qc
// ("high-error"), when fewer than three cameras support it ("few-inliers"), or
// when some assigned view misses the estimate by more than tau_qc
// ("outlier-view"): a consensus estimate keeps its inlier error below
// tau_reproj, so a bad label in an excluded view only shows up there.
std::vector<QcRecord> qc_filter(std::span<const KeypointResult> estimates, double tau_qc);

nlohmann::json to_json(const QcRecord& record, long long frame);

}  // namespace etho::consensus
