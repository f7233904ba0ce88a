#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "etho/behavior/timeline.hpp"
#include "etho/error.hpp"
#include "etho/pose/io.hpp"
#include "etho/util/csv.hpp"
#include "etho/util/text.hpp"
#include "pose_job.hpp"
#include "run_state.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KeypointStats {
  long long frames = 0;
  long long estimated = 0;
  long long flagged = 0;
  std::vector<double> errors;
  long long labels = 0;
  long long labels_correct = 0;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string cell(double v) { return std::isnan(v) ? "" : util::fmt_fixed(v, 3); }

struct PoseReportArgs {
  std::string config;
  std::string output;
  std::string points;
  std::string labels;
};

int report_pose(const PoseReportArgs& args) {
  PoseOverrides ov;
  ov.output = args.output;
  const auto job = load_pose_job(args.config, ov);
  const fs::path dir = job.output;

  std::optional<pose::PointTable> truth;
  if (!args.points.empty()) {
    truth = pose::read_points(args.points);
  } else if (job.truth_points) {
    truth = pose::read_points(*job.truth_points);
  }
  std::optional<std::map<long long, pose::AssignmentState>> truth_labels;
  if (!args.labels.empty()) {
    truth_labels = pose::read_labels(args.labels);
  } else if (job.truth_labels) {
    truth_labels = pose::read_labels(*job.truth_labels);
  }

  std::array<KeypointStats, pose::kNumKeypoints> stats{};
  const auto traj = util::CsvTable::read(dir / "trajectory.csv");
  traj.require_columns({"frame", "keypoint", "x", "y", "z"});
  for (std::size_t i = 0; i < traj.rows(); ++i) {
    const auto k = pose::parse_keypoint(traj.str(i, "keypoint"));
    if (!k) throw ValidationError("trajectory.csv: unknown keypoint '" + traj.str(i, "keypoint") + "'");
    auto& s = stats[pose::index_of(*k)];
    ++s.frames;
    if (traj.str(i, "x").empty()) continue;
    ++s.estimated;
    if (!truth) continue;
    const auto f = traj.integer(i, "frame");
    auto it = truth->find(f);
    if (it == truth->end() || !it->second[pose::index_of(*k)]) continue;
    const auto& p = *it->second[pose::index_of(*k)];
    s.errors.push_back(std::hypot(traj.num(i, "x") - p.x, traj.num(i, "y") - p.y, traj.num(i, "z") - p.z));
  }
  for (const auto& line : util::split(util::read_file(dir / "qc.jsonl"), '\n')) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    if (j.at("verdict") != "flag") continue;
    if (auto k = pose::parse_keypoint(j.at("keypoint").get<std::string>())) ++stats[pose::index_of(*k)].flagged;
  }
  if (truth_labels) {
    for (const auto& [f, st] : pose::read_labels(dir / "assignments.csv", pose::Provenance::kStage2)) {
      auto it = truth_labels->find(f);
      if (it == truth_labels->end()) continue;
      for (const auto& [view, va] : st.views) {
        auto tv = it->second.views.find(view);
        if (tv == it->second.views.end()) continue;
        for (auto k : pose::all_keypoints()) {
          auto& s = stats[pose::index_of(k)];
          ++s.labels;
          s.labels_correct += va[k].centroid == tv->second[k].centroid ? 1 : 0;
        }
      }
    }
  }

  std::string table = "keypoint,frames,estimated,flagged,mean_error_mm,median_error_mm,label_accuracy\n";
  KeypointStats all;
  auto row = [&](std::string_view name, const KeypointStats& s) {
    table += std::string(name) + "," + std::to_string(s.frames) + "," + std::to_string(s.estimated) + "," +
             std::to_string(s.flagged) + "," + cell(mean(s.errors)) + "," + cell(median(s.errors)) + "," +
             (s.labels ? util::fmt_fixed(static_cast<double>(s.labels_correct) / static_cast<double>(s.labels), 4)
                       : std::string()) +
             "\n";
  };
  for (auto k : pose::all_keypoints()) {
    const auto& s = stats[pose::index_of(k)];
    row(pose::name_of(k), s);
    all.frames += s.frames;
    all.estimated += s.estimated;
    all.flagged += s.flagged;
    all.errors.insert(all.errors.end(), s.errors.begin(), s.errors.end());
    all.labels += s.labels;
    all.labels_correct += s.labels_correct;
  }
  row("all", all);
  write_atomic(dir / "report_pose.csv", table);
  std::cout << table;
  return 0;
}

// Duration bins in seconds; the last one is open.
constexpr std::array<double, 7> kBinEdges{0.0, 1.0, 2.0, 5.0, 10.0, 30.0, 60.0};

std::size_t bin_of(double seconds) {
  std::size_t b = 0;
  while (b + 1 < kBinEdges.size() && seconds >= kBinEdges[b + 1]) ++b;
  return b;
}

std::string bin_name(std::size_t b) {
  const auto lo = util::fmt_double(kBinEdges[b]);
  return b + 1 < kBinEdges.size() ? "[" + lo + "," + util::fmt_double(kBinEdges[b + 1]) + ")" : ">=" + lo;
}

struct BehaviorReportArgs {
  std::string timeline;
  std::string output;
};

int report_behavior(const BehaviorReportArgs& args) {
  const fs::path path = args.timeline.empty() ? fs::path(args.output) / "timeline.json" : fs::path(args.timeline);
  const auto tl = behavior::read_timeline(path);
  tl.validate();
  std::string table = "animal,level,duration_bin,count,mean_s\n";
  for (const auto& [animal, at] : tl.animals) {
    std::array<std::vector<double>, kBinEdges.size()> clips{}, merged{};
    for (const auto& c : at.clips) {
      const double d = static_cast<double>(c.clip.length()) / tl.fps;
      clips[bin_of(d)].push_back(d);
    }
    for (const auto& s : at.segments) {
      const double d = static_cast<double>(s.end - s.start) / tl.fps;
      merged[bin_of(d)].push_back(d);
    }
    for (const auto& [level, bins] : {std::pair{"clip", &clips}, std::pair{"segment", &merged}}) {
      for (std::size_t b = 0; b < kBinEdges.size(); ++b) {
        const auto& v = (*bins)[b];
        table += animal + "," + level + "," + bin_name(b) + "," + std::to_string(v.size()) + "," + cell(mean(v)) + "\n";
      }
    }
  }
  const fs::path out = (args.output.empty() ? path.parent_path() : fs::path(args.output)) / "report_behavior.csv";
  write_atomic(out, table);
  std::cout << table;
  return 0;
}

}  // namespace

void add_report_commands(CLI::App& app, Action& action) {
  auto* rep = app.add_subcommand("report", "Summary tables for finished runs");
  rep->require_subcommand(1);

  auto pa = std::make_shared<PoseReportArgs>();
  auto* pose_rep = rep->add_subcommand("pose", "Per-keypoint 3D error, coverage and QC flags");
  pose_rep->add_option("--config", pa->config, "Configuration the run used")->required()->check(CLI::ExistingFile);
  pose_rep->add_option("--output", pa->output, "Run directory (overrides config)");
  pose_rep->add_option("--points", pa->points, "Ground-truth 3D points (overrides config truth.points)");
  pose_rep->add_option("--labels", pa->labels, "Ground-truth labels (overrides config truth.labels)");
  pose_rep->final_callback([&action, pa] { action = [pa] { return report_pose(*pa); }; });

  auto ba = std::make_shared<BehaviorReportArgs>();
  auto* beh_rep = rep->add_subcommand("behavior", "Clip and segment duration histograms");
  beh_rep->add_option("--timeline", ba->timeline, "Timeline document");
  beh_rep->add_option("--output", ba->output, "Behavior output directory");
  beh_rep->final_callback([&action, ba] {
    action = [ba] {
      if (ba->timeline.empty() && ba->output.empty()) throw ConfigError("pass --timeline or --output");
      return report_behavior(*ba);
    };
  });
}

}  // namespace etho::cli
