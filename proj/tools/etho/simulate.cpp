#include <filesystem>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "etho/geometry/calibration_io.hpp"
#include "etho/pose/io.hpp"
#include "etho/synth/features.hpp"
#include "etho/synth/observations.hpp"
#include "etho/util/text.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RigArgs {
  std::string out;
  int frames = 500;
  std::uint64_t seed = 0;
  int cameras = 6;
  double noise = 1.0;
  double occlusion = 0.0;
  double p_swap = 0.15;
  double box_jitter = 0.0;
  double p_drop = 0.0;
};

int simulate_rig(const RigArgs& a) {
  const fs::path out(a.out);
  synth::RigConfig rig_cfg;
  rig_cfg.n_cameras = a.cameras;
  const auto rig = synth::generate_rig(rig_cfg, util::stream_seed(a.seed, {1}));
  const auto traj = synth::generate_skeleton_trajectory(a.frames, synth::SkeletonConfig{}, util::stream_seed(a.seed, {2}));
  synth::ObservationConfig obs_cfg;
  obs_cfg.noise_sigma = a.noise;
  obs_cfg.occlusion = a.occlusion;
  const auto seq = synth::render_observations(traj, rig, obs_cfg, util::stream_seed(a.seed, {3}));

  std::string cents(pose::kCentroidsHeader), boxes(pose::kBBoxesHeader), labels(pose::kLabelsHeader),
      seeds(pose::kLabelsHeader), regions(pose::kRegionsHeader), points(pose::kPointsHeader);
  for (auto* s : {&cents, &boxes, &labels, &seeds, &regions, &points}) *s += "\n";
  for (const auto& f : seq.frames) {
    cents += pose::centroid_rows(f);
    boxes += pose::bbox_rows(f);
    const auto& truth = seq.truth.at(f.frame_index);
    labels += pose::label_rows(truth);
    if (f.frame_index < 3) seeds += pose::label_rows(truth);
    std::map<std::string, pose::RegionBoxes> per_view;
    for (const auto& [view, obs] : f.views) per_view[view] = seq.regions.at({f.frame_index, view});
    regions += pose::region_rows(f.frame_index, per_view);
    points += synth::point_rows(f.frame_index, seq.points.at(f.frame_index));
  }
  geometry::write_calibration(out / "calibration.json", rig);
  util::write_file(out / "centroids.csv", cents);
  util::write_file(out / "bboxes.csv", boxes);
  util::write_file(out / "labels.csv", labels);
  util::write_file(out / "seeds.csv", seeds);
  util::write_file(out / "regions.csv", regions);
  util::write_file(out / "points.csv", points);

  const json config = {
      {"calibration", "calibration.json"},
      {"centroids", "centroids.csv"},
      {"bboxes", "bboxes.csv"},
      {"seeds", "seeds.csv"},
      {"output", "run"},
      {"ablation", "full"},
      {"truth", {{"points", "points.csv"}, {"labels", "labels.csv"}}},
      {"client",
       {{"kind", "oracle"},
        {"labels", "labels.csv"},
        {"regions", "regions.csv"},
        {"corruption",
         {{"p_swap", a.p_swap}, {"box_jitter", a.box_jitter}, {"p_drop", a.p_drop}, {"seed", a.seed}}}}}};
  util::write_file(out / "pose_config.json", config.dump(2) + "\n");
  std::cout << "wrote " << seq.frames.size() << " frames x " << rig.size() << " views to " << out.string() << "\n";
  return 0;
}

struct SessionArgs {
  std::string out;
  int animals = 3;
  long long frames = 3000;
  double fps = 10.0;
  int dim = 16;
  int behaviors = 5;
  double noise = 1.0;
  double separation = 6.0;
  std::uint64_t seed = 0;
};

int simulate_session(const SessionArgs& a) {
  const fs::path out(a.out);
  synth::FeatureSessionConfig cfg;
  cfg.animals.clear();
  for (int i = 0; i < a.animals; ++i) cfg.animals.push_back("A" + std::to_string(i));
  cfg.frames = a.frames;
  cfg.fps = a.fps;
  cfg.dim = a.dim;
  cfg.behaviors = a.behaviors;
  cfg.noise = a.noise;
  cfg.separation = a.separation;
  const auto session = synth::generate_feature_session(cfg, a.seed);

  behavior::write_features(out / "features.txt", session.sequences);
  util::write_file(out / "behavior_truth.json", synth::to_json(session.truth).dump(2) + "\n");
  const json config = {{"features", "features.txt"},
                       {"output", "behavior"},
                       {"min_duration_s", 0.5},
                       {"dec", {{"k", 10}, {"seed", a.seed}}},
                       {"caption", {{"fps", 10.0}}},
                       {"merge", {{"epoch_seconds", 60.0}}},
                       {"client", {{"kind", "oracle"}, {"behavior_truth", "behavior_truth.json"}}}};
  util::write_file(out / "behavior_config.json", config.dump(2) + "\n");
  std::cout << "wrote " << a.animals << " animals x " << a.frames << " frames to " << out.string() << "\n";
  return 0;
}

}  // namespace

void add_simulate_commands(CLI::App& app, Action& action) {
  auto* sim = app.add_subcommand("simulate", "Write synthetic datasets with ground truth");
  sim->require_subcommand(1);

  auto rig_args = std::make_shared<RigArgs>();
  auto* rig = sim->add_subcommand("rig", "Camera rig, skeleton trajectory and centroid observations");
  rig->add_option("--out", rig_args->out, "Output directory")->required();
  rig->add_option("--frames", rig_args->frames, "Frames to simulate")->check(CLI::Range(4, 1000000));
  rig->add_option("--seed", rig_args->seed, "Base seed");
  rig->add_option("--cameras", rig_args->cameras, "Cameras on the ring")->check(CLI::Range(2, 64));
  rig->add_option("--noise", rig_args->noise, "Centroid noise sigma (px)")->check(CLI::NonNegativeNumber);
  rig->add_option("--occlusion", rig_args->occlusion, "Per keypoint-view drop rate")->check(CLI::Range(0.0, 1.0));
  rig->add_option("--p-swap", rig_args->p_swap, "Oracle swap rate written to pose_config.json")
      ->check(CLI::Range(0.0, 1.0));
  rig->add_option("--box-jitter", rig_args->box_jitter, "Oracle region-box jitter (px)")
      ->check(CLI::NonNegativeNumber);
  rig->add_option("--p-drop", rig_args->p_drop, "Oracle drop rate")->check(CLI::Range(0.0, 1.0));
  rig->final_callback([&action, rig_args] { action = [rig_args] { return simulate_rig(*rig_args); }; });

  auto ses_args = std::make_shared<SessionArgs>();
  auto* ses = sim->add_subcommand("session", "Per-animal behavior features with planted segments");
  ses->add_option("--out", ses_args->out, "Output directory")->required();
  ses->add_option("--animals", ses_args->animals, "Number of animals")->check(CLI::Range(1, 1000));
  ses->add_option("--frames", ses_args->frames, "Frames per animal")->check(CLI::Range(2LL, 100000000LL));
  ses->add_option("--fps", ses_args->fps, "Frame rate")->check(CLI::PositiveNumber);
  ses->add_option("--dim", ses_args->dim, "Feature dimension")->check(CLI::Range(1, 4096));
  ses->add_option("--behaviors", ses_args->behaviors, "Distinct planted behaviors")->check(CLI::Range(2, 1000));
  ses->add_option("--noise", ses_args->noise, "Per-dimension frame noise")->check(CLI::NonNegativeNumber);
  ses->add_option("--separation", ses_args->separation, "Spread of behavior centres")->check(CLI::PositiveNumber);
  ses->add_option("--seed", ses_args->seed, "Base seed");
  ses->final_callback([&action, ses_args] { action = [ses_args] { return simulate_session(*ses_args); }; });
}

}  // namespace etho::cli
