#include "etho/consensus/refine.hpp"

#include <algorithm>
#include <cmath>

#include "etho/error.hpp"

namespace etho::consensus {

void RefineConfig::validate() const {
  ransac.validate();
  if (!(hypothesis_radius > 0.0)) throw ConfigError("refine.hypothesis_radius must be > 0");
  if (!(tau_qc > 0.0)) throw ConfigError("qc.tau_qc must be > 0");
}

CameraSet index_cameras(const std::vector<CameraModel>& cameras) {
  CameraSet out;
  for (const auto& c : cameras) out.emplace(c.name, c);
  return out;
}

CameraPartition partition_cameras(const Keypoint3DEstimate& /*estimate*/,
                                  const std::map<std::string, double>& all_errors, double tau) {
  CameraPartition p;
  for (const auto& [name, err] : all_errors) {
    (err <= tau ? p.locked : p.target).insert(name);
  }
  return p;
}

std::vector<Hypothesis> enumerate_hypotheses(const CameraModel& camera,
                                             const pose::FrameObservation& frame,
                                             const pose::ViewAssignment& assignment,
                                             Keypoint keypoint, const Keypoint3DEstimate& estimate,
                                             double radius) {
  const auto current = assignment[keypoint].centroid;
  std::vector<Hypothesis> out;
  Hypothesis keep;
  keep.target_camera = camera.name;
  keep.keypoint = keypoint;
  keep.candidate_centroid = current;
  keep.keep_current = true;
  out.push_back(keep);

  geometry::PixelPoint projected;
  try {
    projected = geometry::project(camera, estimate.point);
  } catch (const DegenerateDepth&) {
    return out;
  }
  for (std::size_t i = 0; i < frame.centroids.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (current == idx) continue;
    const auto& c = frame.centroids[i];
    if (std::hypot(c.x - projected.x, c.y - projected.y) > radius) continue;
    Hypothesis h;
    h.target_camera = camera.name;
    h.keypoint = keypoint;
    h.candidate_centroid = idx;
    if (auto owner = assignment.owner_of(idx)) {
      h.implied_swaps.push_back({*owner, idx, current});
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Observation> gather_observations(const CameraSet& cameras, const pose::FrameBundle& frame,
                                             const pose::AssignmentState& state, Keypoint keypoint) {
  std::vector<Observation> out;
  for (const auto& [view, va] : state.views) {
    const auto& slot = va[keypoint];
    if (!slot.centroid) continue;
    auto cam = cameras.find(view);
    auto obs = frame.views.find(view);
    if (cam == cameras.end() || obs == frame.views.end()) {
      throw ValidationError("assignment for unknown view '" + view + "'");
    }
    auto c = obs->second.centroid(*slot.centroid);
    if (!c) {
      throw ValidationError("frame " + std::to_string(frame.frame_index) + " view '" + view +
                            "': centroid " + std::to_string(*slot.centroid) + " does not exist");
    }
    out.push_back({cam->second, *c});
  }
  return out;
}

double keypoint_score(const FrameContext& ctx, Keypoint keypoint) {
  const auto obs = gather_observations(ctx.cameras, ctx.frame, ctx.state, keypoint);
  if (obs.size() < 2) return kUntriangulatedPenalty;
  try {
    const auto est = ransac_triangulate(obs, ctx.ransac);
    double sum = 0.0;
    for (const auto& [name, e] : est.per_camera_error) sum += std::min(e, kUntriangulatedPenalty);
    return sum / static_cast<double>(est.per_camera_error.size());
  } catch (const NoConsensus&) {
    return kUntriangulatedPenalty;
  }
}

void apply_hypothesis(pose::AssignmentState& state, const Hypothesis& h) {
  if (h.keep_current) return;
  auto& view = state.views.at(h.target_camera);
  for (const auto& s : h.implied_swaps) {
    view[s.keypoint].centroid = s.new_centroid;
    view[s.keypoint].provenance = pose::Provenance::kStage4;
  }
  view[h.keypoint].centroid = h.candidate_centroid;
  view[h.keypoint].provenance = pose::Provenance::kStage4;
}

Hypothesis score_and_select(std::vector<Hypothesis>& hypotheses, const FrameContext& ctx) {
  if (hypotheses.empty()) throw ValidationError("score_and_select: empty hypothesis list");

  std::set<Keypoint> affected;
  for (const auto& h : hypotheses) {
    affected.insert(h.keypoint);
    for (const auto& s : h.implied_swaps) affected.insert(s.keypoint);
  }
  std::map<Keypoint, double> base;
  for (auto k : affected) base[k] = keypoint_score(ctx, k);

  for (auto& h : hypotheses) {
    std::map<Keypoint, double> vals = base;
    if (!h.keep_current) {
      pose::AssignmentState trial = ctx.state;
      apply_hypothesis(trial, h);
      const FrameContext tctx{ctx.cameras, ctx.frame, trial, ctx.ransac};
      vals[h.keypoint] = keypoint_score(tctx, h.keypoint);
      for (const auto& s : h.implied_swaps) vals[s.keypoint] = keypoint_score(tctx, s.keypoint);
    }
    double sum = 0.0;
    for (const auto& [k, v] : vals) sum += v;
    h.score = sum / static_cast<double>(vals.size());
  }

  const auto keep = std::find_if(hypotheses.begin(), hypotheses.end(),
                                 [](const Hypothesis& h) { return h.keep_current; });
  const Hypothesis* best = keep != hypotheses.end() ? &*keep : &hypotheses.front();
  for (const auto& h : hypotheses) {
    if (h.score < best->score) best = &h;
  }
  return *best;
}

namespace {

KeypointResult estimate_one(const CameraSet& cameras, const pose::FrameBundle& frame,
                            const pose::AssignmentState& state, Keypoint k,
                            const RansacConfig* config) {
  KeypointResult r;
  r.keypoint = k;
  const auto obs = gather_observations(cameras, frame, state, k);
  if (obs.size() < 2) {
    r.status = "insufficient-views";
    return r;
  }
  try {
    r.estimate = config ? ransac_triangulate(obs, *config) : triangulate_trusted(obs);
    r.estimate->keypoint = k;
    r.status = "ok";
  } catch (const NoConsensus&) {
    r.status = "no-consensus";
  } catch (const DegenerateGeometry&) {
    r.status = "no-consensus";
  }
  return r;
}

nlohmann::json log_entry(long long frame, const Hypothesis& keep, const Hypothesis& chosen) {
  nlohmann::json swaps = nlohmann::json::array();
  auto idx = [](const std::optional<int>& c) -> nlohmann::json {
    return c ? nlohmann::json(*c) : nlohmann::json(nullptr);
  };
  for (const auto& s : chosen.implied_swaps) {
    swaps.push_back({{"keypoint", pose::name_of(s.keypoint)},
                     {"from", idx(s.old_centroid)},
                     {"to", idx(s.new_centroid)}});
  }
  const char* kind = chosen.keep_current ? "keep" : (chosen.implied_swaps.empty() ? "switch" : "swap");
  return {{"frame", frame},
          {"keypoint", pose::name_of(chosen.keypoint)},
          {"camera", chosen.target_camera},
          {"chosen", kind},
          {"from", idx(keep.candidate_centroid)},
          {"to", idx(chosen.candidate_centroid)},
          {"score_before", keep.score},
          {"score_after", chosen.score},
          {"swaps", swaps}};
}

}  // namespace

std::vector<KeypointResult> estimate_all(const CameraSet& cameras, const pose::FrameBundle& frame,
                                         const pose::AssignmentState& state,
                                         const RansacConfig& config) {
  std::vector<KeypointResult> out;
  for (auto k : pose::all_keypoints()) out.push_back(estimate_one(cameras, frame, state, k, &config));
  return out;
}

std::vector<KeypointResult> estimate_all_trusted(const CameraSet& cameras,
                                                 const pose::FrameBundle& frame,
                                                 const pose::AssignmentState& state) {
  std::vector<KeypointResult> out;
  for (auto k : pose::all_keypoints()) out.push_back(estimate_one(cameras, frame, state, k, nullptr));
  return out;
}

RefineResult refine_frame(const pose::AssignmentState& assignments, const pose::FrameBundle& frame,
                          const CameraSet& cameras, const RefineConfig& config) {
  RefineResult result;
  result.state = assignments;
  auto& state = result.state;
  const double tau = config.ransac.tau_reproj;

  auto sweep = [&](const std::vector<Keypoint>& order) {
    std::set<Keypoint> changed;
    for (auto k : order) {
      auto r = estimate_one(cameras, frame, state, k, &config.ransac);
      if (!r.estimate) continue;
      const auto part = partition_cameras(*r.estimate, r.estimate->per_camera_error, tau);
      for (const auto& cam_name : part.target) {
        if (r.estimate->per_camera_error.at(cam_name) <= tau) continue;
        const auto& cam = cameras.at(cam_name);
        auto hyps = enumerate_hypotheses(cam, frame.views.at(cam_name), state.views.at(cam_name), k,
                                         *r.estimate, config.hypothesis_radius);
        if (hyps.size() < 2) continue;
        const FrameContext ctx{cameras, frame, state, config.ransac};
        const Hypothesis chosen = score_and_select(hyps, ctx);
        const auto keep = std::find_if(hyps.begin(), hyps.end(),
                                       [](const Hypothesis& h) { return h.keep_current; });
        result.log.push_back(log_entry(frame.frame_index, *keep, chosen));
        if (chosen.keep_current) continue;
        apply_hypothesis(state, chosen);
        changed.insert(k);
        for (const auto& s : chosen.implied_swaps) changed.insert(s.keypoint);
        r = estimate_one(cameras, frame, state, k, &config.ransac);
        if (!r.estimate) break;
      }
    }
    return changed;
  };

  const std::vector<Keypoint> all(pose::all_keypoints().begin(), pose::all_keypoints().end());
  const auto changed = sweep(all);
  if (!changed.empty()) sweep(std::vector<Keypoint>(changed.begin(), changed.end()));

  state.validate_injective();
  result.estimates = estimate_all(cameras, frame, state, config.ransac);
  return result;
}

}  // namespace etho::consensus
