#include "etho/pose/pipeline.hpp"

#include <algorithm>
#include <future>

#include "etho/error.hpp"

namespace etho::pose {

std::string_view name_of(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoRefine:
      return "no-refine";
    case Ablation::kNaive:
      return "naive";
  }
  return "full";
}

std::optional<Ablation> parse_ablation(std::string_view name) {
  for (auto a : {Ablation::kFull, Ablation::kNoRefine, Ablation::kNaive}) {
    if (name_of(a) == name) return a;
  }
  return std::nullopt;
}

void PoseRunConfig::validate() const {
  refine.validate();
  if (max_retries < 0) throw ConfigError("client.max_retries must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

PoseRunner::PoseRunner(consensus::CameraSet cameras, RollingWindow window, const PerceptionClient& client,
                       PoseRunConfig config)
    : cameras_(std::move(cameras)), window_(std::move(window)), client_(client), config_(std::move(config)) {
  config_.validate();
}

namespace {

struct ViewResult {
  ViewAssignment assignment;
  RegionBoxes regions{};
  StageReport report;
};

ViewResult label_one_view(const FrameObservation& obs, const RollingWindow& window,
                          const PerceptionClient& client, Ablation ablation, int max_retries) {
  ViewResult out;
  std::vector<PartialAssignment> partials;
  std::vector<bool> region_flagged;
  if (ablation == Ablation::kNaive) {
    out.regions.fill(obs.crop);
    auto ra = assign_within_region("all", all_keypoints(), obs.crop, obs, window, client, max_retries);
    out.report.absorb(ra.report);
    partials.push_back(std::move(ra.assignment));
    region_flagged.push_back(ra.flagged);
  } else {
    auto det = detect_regions(obs, window, client, max_retries);
    out.report.absorb(det.report);
    out.regions = det.boxes;
    for (auto r : all_regions()) {
      auto ra = assign_within_region(name_of(r), region_keypoints(r), det.boxes[index_of(r)], obs, window,
                                     client, max_retries);
      out.report.absorb(ra.report);
      partials.push_back(std::move(ra.assignment));
      region_flagged.push_back(ra.flagged);
    }
  }
  auto rec = reconcile_frame(partials, obs, window, client, max_retries);
  out.report.absorb(rec.report);
  out.assignment = rec.assignment;
  for (std::size_t i = 0; i < partials.size(); ++i) {
    if (!region_flagged[i]) continue;
    for (const auto& [k, v] : partials[i]) out.assignment[k].flagged = true;
  }
  return out;
}

}  // namespace

AssignmentState PoseRunner::label_views(const FrameBundle& frame, FrameOutput& out) {
  AssignmentState state;
  state.frame_index = frame.frame_index;
  std::vector<const FrameObservation*> views;
  for (const auto& [name, obs] : frame.views) views.push_back(&obs);

  std::vector<ViewResult> results(views.size());
  const auto workers = static_cast<std::size_t>(config_.workers);
  for (std::size_t begin = 0; begin < views.size(); begin += workers) {
    const std::size_t end = std::min(views.size(), begin + workers);
    if (end - begin == 1) {
      results[begin] = label_one_view(*views[begin], window_, client_, config_.ablation, config_.max_retries);
      continue;
    }
    std::vector<std::future<ViewResult>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, label_one_view, std::cref(*views[i]), std::cref(window_),
                                   std::cref(client_), config_.ablation, config_.max_retries));
    }
    for (std::size_t i = begin; i < end; ++i) results[i] = pending[i - begin].get();
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    state.views[views[i]->view] = results[i].assignment;
    out.regions[views[i]->view] = results[i].regions;
    out.report.absorb(results[i].report);
  }
  state.validate_injective();
  return state;
}

std::vector<consensus::QcRecord> frame_qc(const std::vector<consensus::KeypointResult>& estimates,
                                          const AssignmentState& state, bool degraded, double tau_qc) {
  auto records = consensus::qc_filter(estimates, tau_qc);
  for (auto& q : records) {
    std::vector<std::string> extra;
    for (const auto& [view, va] : state.views) {
      if (va[q.keypoint].flagged) {
        extra.push_back("assignment-flag");
        break;
      }
    }
    if (degraded) extra.push_back("degraded-frame");
    for (const auto& e : extra) {
      q.verdict = consensus::Verdict::kFlag;
      q.reason += (q.reason.empty() ? "" : ";") + e;
    }
  }
  return records;
}

FrameOutput PoseRunner::process(const FrameBundle& frame) {
  FrameOutput out;
  out.frame_index = frame.frame_index;
  for (const auto& [name, obs] : frame.views) {
    if (!cameras_.contains(name)) {
      throw ConfigError("frame " + std::to_string(frame.frame_index) + ": view '" + name +
                        "' is not in the calibration");
    }
  }
  AssignmentState state = label_views(frame, out);

  if (config_.ablation == Ablation::kFull) {
    auto refined = consensus::refine_frame(state, frame, cameras_, config_.refine);
    state = std::move(refined.state);
    out.estimates = std::move(refined.estimates);
    out.refine_log = std::move(refined.log);
  } else {
    out.estimates = consensus::estimate_all_trusted(cameras_, frame, state);
  }
  if (out.report.degraded) state.flags.push_back("degraded");
  for (const auto& w : out.report.warnings) state.flags.push_back(w);
  out.qc = frame_qc(out.estimates, state, out.report.degraded, config_.refine.tau_qc);
  out.assignments = state;

  const bool flagged = std::any_of(out.qc.begin(), out.qc.end(),
                                   [](const auto& q) { return q.verdict == consensus::Verdict::kFlag; });
  if (!(config_.strict_window && flagged)) {
    ExemplarFrame ex;
    ex.frame = frame;
    ex.assignments = out.assignments;
    for (const auto& [name, obs] : frame.views) {
      ex.regions[name] = regions_from_assignment(obs, out.assignments.views.at(name));
    }
    window_.push(std::move(ex));
    out.window_updated = true;
  }
  return out;
}

std::vector<FrameOutput> run_sequence(const std::vector<FrameBundle>& frames, std::vector<ExemplarFrame> seeds,
                                      const consensus::CameraSet& cameras, const PoseRunConfig& config,
                                      const PerceptionClient& client,
                                      const std::function<void(const FrameOutput&)>& on_frame) {
  PoseRunner runner(cameras, RollingWindow(std::move(seeds)), client, config);
  std::vector<FrameOutput> outputs;
  outputs.reserve(frames.size());
  for (const auto& f : frames) {
    outputs.push_back(runner.process(f));
    if (on_frame) on_frame(outputs.back());
  }
  return outputs;
}

}  // namespace etho::pose
