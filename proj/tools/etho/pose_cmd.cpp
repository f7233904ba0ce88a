#include <algorithm>
#include <iostream>
#include <map>

#include "clients.hpp"
#include "commands.hpp"
#include "etho/error.hpp"
#include "etho/geometry/calibration_io.hpp"
#include "etho/pose/io.hpp"
#include "etho/util/text.hpp"
#include "pose_job.hpp"
#include "run_state.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PoseInputs {
  consensus::CameraSet cameras;
  std::vector<pose::FrameBundle> frames;
  std::vector<pose::ExemplarFrame> seeds;
  std::vector<const pose::FrameBundle*> todo;  // frames after the seeds, within the configured range
};

PoseInputs load_inputs(const PoseJob& job) {
  PoseInputs in;
  in.cameras = consensus::index_cameras(geometry::read_calibration(job.calibration));
  in.frames = pose::read_frames(job.centroids, job.bboxes, in.cameras, job.images);
  in.seeds = pose::make_seeds(pose::read_labels(job.seeds), in.frames);
  if (in.seeds.empty()) throw ValidationError(job.seeds.string() + ": no seed frames");
  const long long after = in.seeds.back().frame_index();
  for (const auto& f : in.frames) {
    if (f.frame_index <= after) continue;
    if (job.first_frame && f.frame_index < *job.first_frame) continue;
    if (job.last_frame && f.frame_index > *job.last_frame) continue;
    in.todo.push_back(&f);
  }
  return in;
}

json review_entry(long long frame, const consensus::QcRecord& q, const pose::AssignmentState& state) {
  json labels = json::object();
  for (const auto& [view, va] : state.views) {
    const auto& c = va[q.keypoint].centroid;
    labels[view] = c ? json(*c) : json(nullptr);
  }
  json e = consensus::to_json(q, frame);
  e.erase("verdict");
  e["labels"] = labels;
  return e;
}

std::string review_lines(long long frame, const std::vector<consensus::QcRecord>& qc,
                         const pose::AssignmentState& state) {
  std::string out;
  for (const auto& q : qc) {
    if (q.verdict == consensus::Verdict::kFlag) out += review_entry(frame, q, state).dump() + "\n";
  }
  return out;
}

json add_counts(json totals, const pose::FrameOutput& out) {
  auto bump = [&](const char* key, long long n) { totals[key] = totals.value(key, 0LL) + n; };
  bump("frames", 1);
  bump("calls", out.report.calls);
  bump("retries", out.report.retries);
  bump("schema_failures", out.report.schema_failures);
  bump("unavailable", out.report.unavailable);
  bump("degraded_frames", out.report.degraded ? 1 : 0);
  long long flagged = 0;
  for (const auto& q : out.qc) flagged += q.verdict == consensus::Verdict::kFlag ? 1 : 0;
  bump("flagged_keypoints", flagged);
  bump("keypoints", static_cast<long long>(out.qc.size()));
  return totals;
}

const std::vector<OutputSpec>& pose_outputs() {
  static const std::vector<OutputSpec> kOutputs = {
      {"assignments.csv", std::string(pose::kAssignmentsHeader)},
      {"regions.csv", std::string(pose::kRegionsHeader)},
      {"trajectory.csv", std::string(pose::kTrajectoryHeader)},
      {"qc.jsonl", ""},
      {"review.jsonl", ""},
      {"refine_log.jsonl", ""},
      {"frames.jsonl", ""},
  };
  return kOutputs;
}

struct PoseRunArgs {
  std::string config;
  PoseOverrides overrides;
  long long max_frames = -1;
  bool fresh = false;
};

int pose_run(const PoseRunArgs& args) {
  const auto job = load_pose_job(args.config, args.overrides);
  auto client = make_client(ConfigNode(job.client, "client"), job.base_dir);
  const auto in = load_inputs(job);

  ResumableRun run(job.output, pose_digest(job), pose_outputs(), args.fresh);
  write_atomic(job.output / "effective_config.json", job.effective.dump(2) + "\n");

  pose::RollingWindow window(in.seeds);
  if (run.resumed()) {
    const auto done = pose::read_labels(job.output / "assignments.csv", pose::Provenance::kStage2);
    for (const auto& idx : run.state().value("window", json::array())) {
      const long long f = idx.get<long long>();
      auto it = std::find_if(in.frames.begin(), in.frames.end(), [&](const auto& b) { return b.frame_index == f; });
      if (it == in.frames.end() || !done.contains(f)) {
        throw IoError("cannot rebuild the exemplar window: frame " + std::to_string(f) + " is missing");
      }
      pose::ExemplarFrame ex;
      ex.frame = *it;
      ex.assignments = done.at(f);
      for (const auto& [view, obs] : it->views) {
        ex.regions[view] = pose::regions_from_assignment(obs, ex.assignments.views.at(view));
      }
      window.push(std::move(ex));
    }
  }

  pose::PoseRunConfig cfg = job.run;
  cfg.max_retries = client.max_retries;
  pose::PoseRunner runner(in.cameras, std::move(window), *client.client, cfg);

  json state = run.state();
  json totals = state.value("totals", json::object());
  std::vector<long long> win;
  for (const auto& idx : state.value("window", json::array())) win.push_back(idx.get<long long>());

  long long done = run.completed();
  long long processed_now = 0;
  long long calls_now = 0;
  long long unavailable_now = 0;
  const auto total = static_cast<long long>(in.todo.size());
  while (done < total) {
    if (args.max_frames >= 0 && processed_now >= args.max_frames) {
      std::cout << "stopped after " << processed_now << " frames (" << done << "/" << total
                << " done); rerun to resume\n";
      return 0;
    }
    const auto& frame = *in.todo[static_cast<std::size_t>(done)];
    const auto out = runner.process(frame);
    const long long f = out.frame_index;

    run.append("assignments.csv", pose::assignment_rows(out.assignments));
    run.append("regions.csv", pose::region_rows(f, out.regions));
    run.append("trajectory.csv", pose::trajectory_rows(f, out.estimates));
    run.append("qc.jsonl", pose::qc_lines(f, out.qc));
    run.append("review.jsonl", review_lines(f, out.qc, out.assignments));
    run.append("refine_log.jsonl", pose::json_lines(out.refine_log));
    const json frame_rec = {{"frame", f},
                            {"calls", out.report.calls},
                            {"retries", out.report.retries},
                            {"schema_failures", out.report.schema_failures},
                            {"unavailable", out.report.unavailable},
                            {"degraded", out.report.degraded},
                            {"window_updated", out.window_updated},
                            {"warnings", out.report.warnings}};
    run.append("frames.jsonl", frame_rec.dump() + "\n");

    if (out.window_updated) {
      win.push_back(f);
      if (win.size() > pose::RollingWindow::kCapacity) win.erase(win.begin());
    }
    totals = add_counts(std::move(totals), out);
    ++done;
    ++processed_now;
    calls_now += out.report.calls;
    unavailable_now += out.report.unavailable;
    run.commit(done, {{"window", win}, {"totals", totals}});
  }

  json summary = {{"ablation", pose::name_of(job.run.ablation)}, {"frames_total", total}, {"totals", totals}};
  write_atomic(job.output / "summary.json", summary.dump(2) + "\n");
  std::cout << "pose run: " << total << " frames, " << totals.value("flagged_keypoints", 0LL)
            << " flagged keypoint estimates, output in " << job.output.string() << "\n";
  if (calls_now > 0 && unavailable_now == calls_now) {
    std::cerr << "etho: error: perception client unavailable for every call\n";
    return 3;
  }
  return 0;
}

struct PoseQcArgs {
  std::string config;
  std::string output;
  double tau = 10.0;
  std::string out;
};

int pose_qc(const PoseQcArgs& args) {
  PoseOverrides ov;
  ov.output = args.output;
  const auto job = load_pose_job(args.config, ov);
  if (!(args.tau > 0.0)) throw ConfigError("--tau must be > 0");
  const auto in = load_inputs(job);
  const auto done = pose::read_labels(job.output / "assignments.csv", pose::Provenance::kStage2);

  std::map<long long, bool> degraded;
  {
    const auto text = util::read_file(job.output / "frames.jsonl");
    for (const auto& line : util::split(text, '\n')) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      degraded[j.at("frame").get<long long>()] = j.at("degraded").get<bool>();
    }
  }

  std::string lines;
  long long flagged = 0;
  long long total = 0;
  for (const auto* frame : in.todo) {
    auto it = done.find(frame->frame_index);
    if (it == done.end()) continue;
    const auto& state = it->second;
    const auto estimates = job.run.ablation == pose::Ablation::kFull
                               ? consensus::estimate_all(in.cameras, *frame, state, job.run.refine.ransac)
                               : consensus::estimate_all_trusted(in.cameras, *frame, state);
    const auto qc = pose::frame_qc(estimates, state, degraded[frame->frame_index], args.tau);
    for (const auto& q : qc) {
      ++total;
      flagged += q.verdict == consensus::Verdict::kFlag ? 1 : 0;
    }
    lines += review_lines(frame->frame_index, qc, state);
  }
  const fs::path target = args.out.empty() ? job.output / ("review_tau" + util::fmt_double(args.tau) + ".jsonl")
                                           : fs::path(args.out);
  write_atomic(target, lines);
  std::cout << "pose qc: tau " << util::fmt_double(args.tau) << " px, " << flagged << " of " << total
            << " keypoint estimates flagged; review manifest " << target.string() << "\n";
  return 0;
}

}  // namespace

void add_pose_commands(CLI::App& app, Action& action) {
  auto* pose_app = app.add_subcommand("pose", "Keypoint labeling over multi-camera centroid streams");
  pose_app->require_subcommand(1);

  auto run_args = std::make_shared<PoseRunArgs>();
  auto* run = pose_app->add_subcommand("run", "Label frames, refine and write the dataset and QC report");
  run->add_option("--config", run_args->config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--ablation", run_args->overrides.ablation, "full, no-refine or naive")
      ->check(CLI::IsMember({"full", "no-refine", "naive"}));
  run->add_option("--output", run_args->overrides.output, "Output directory (overrides config)");
  run->add_option("--workers", run_args->overrides.workers, "Concurrent per-view client calls")
      ->check(CLI::Range(1, 256));
  run->add_option("--max-frames", run_args->max_frames, "Stop after this many frames; rerun to resume")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--fresh", run_args->fresh, "Discard any partial run in the output directory");
  run->final_callback([&action, run_args] { action = [run_args] { return pose_run(*run_args); }; });

  auto qc_args = std::make_shared<PoseQcArgs>();
  auto* qc = pose_app->add_subcommand("qc", "Re-filter a finished run at a new threshold");
  qc->add_option("--config", qc_args->config, "Configuration the run used")->required()->check(CLI::ExistingFile);
  qc->add_option("--output", qc_args->output, "Run directory (overrides config)");
  qc->add_option("--tau", qc_args->tau, "QC threshold in pixels")->required();
  qc->add_option("--out", qc_args->out, "Review manifest path (default: <run>/review_tau<tau>.jsonl)");
  qc->final_callback([&action, qc_args] { action = [qc_args] { return pose_qc(*qc_args); }; });
}

}  // namespace etho::cli
