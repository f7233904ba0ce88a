#include "etho/consensus/qc.hpp"

namespace etho::consensus {

std::vector<QcRecord> qc_filter(std::span<const KeypointResult> estimates, double tau_qc) {
  std::vector<QcRecord> out;
  out.reserve(estimates.size());
  for (const auto& r : estimates) {
    QcRecord q;
    q.keypoint = r.keypoint;
    std::vector<std::string> reasons;
    if (!r.estimate) {
      reasons.push_back(r.status.empty() ? "no-consensus" : r.status);
    } else {
      const auto& e = *r.estimate;
      q.mean_error = e.mean_inlier_error;
      q.inliers = static_cast<int>(e.inlier_cameras.size());
      if (e.mean_inlier_error > tau_qc) reasons.push_back("high-error");
      if (q.inliers < kMinQcInliers) reasons.push_back("few-inliers");
      for (const auto& [view, err] : e.per_camera_error) {
        if (err > tau_qc) q.suspect_views.push_back(view);
      }
      if (!q.suspect_views.empty()) reasons.push_back("outlier-view");
    }
    if (!reasons.empty()) {
      q.verdict = Verdict::kFlag;
      for (std::size_t i = 0; i < reasons.size(); ++i) q.reason += (i ? ";" : "") + reasons[i];
    }
    out.push_back(std::move(q));
  }
  return out;
}

nlohmann::json to_json(const QcRecord& q, long long frame) {
  return {{"frame", frame},
          {"keypoint", pose::name_of(q.keypoint)},
          {"verdict", q.verdict == Verdict::kAccept ? "accept" : "flag"},
          {"reason", q.reason},
          {"mean_error", q.mean_error},
          {"inliers", q.inliers},
          {"suspect_views", q.suspect_views}};
}

}  // namespace etho::consensus
