#include "pose_job.hpp"

#include "etho/error.hpp"
#include "etho/perception/live.hpp"
#include "etho/pose/stages.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

consensus::RansacConfig::Mode parse_mode(const ConfigNode& node) {
  const auto mode = node.str("mode", "auto");
  if (mode == "auto") return consensus::RansacConfig::Mode::kAuto;
  if (mode == "exhaustive") return consensus::RansacConfig::Mode::kExhaustive;
  if (mode == "randomized") return consensus::RansacConfig::Mode::kRandomized;
  throw ConfigError("config key '" + node.key_path("mode") + "' must be auto, exhaustive or randomized");
}

std::string_view mode_name(consensus::RansacConfig::Mode m) {
  switch (m) {
    case consensus::RansacConfig::Mode::kExhaustive:
      return "exhaustive";
    case consensus::RansacConfig::Mode::kRandomized:
      return "randomized";
    default:
      return "auto";
  }
}

}  // namespace

PoseJob load_pose_job(const fs::path& config_path, const PoseOverrides& overrides) {
  const json doc = read_json_file(config_path);
  const ConfigNode root(doc, "");
  root.allow_only({"calibration", "centroids", "bboxes", "seeds", "images", "output", "ablation", "frames", "refine",
                   "strict_window", "workers", "client", "truth"});

  PoseJob job;
  job.base_dir = config_path.parent_path();
  job.calibration = resolve_path(job.base_dir, root.str("calibration"));
  job.centroids = resolve_path(job.base_dir, root.str("centroids"));
  job.bboxes = resolve_path(job.base_dir, root.str("bboxes"));
  job.seeds = resolve_path(job.base_dir, root.str("seeds"));
  job.images = root.str("images", "");
  if (!job.images.empty()) job.images = resolve_path(job.base_dir, job.images).string();
  job.output = overrides.output.empty() ? resolve_path(job.base_dir, root.str("output", "run"))
                                        : fs::path(overrides.output);

  const auto ablation_name = overrides.ablation.empty() ? root.str("ablation", "full") : overrides.ablation;
  auto ablation = pose::parse_ablation(ablation_name);
  if (!ablation) throw ConfigError("config key 'ablation' must be full, no-refine or naive (got '" + ablation_name + "')");
  job.run.ablation = *ablation;

  const auto frames = root.child("frames");
  frames.allow_only({"first", "last"});
  if (frames.has("first")) job.first_frame = frames.integer("first", 0);
  if (frames.has("last")) job.last_frame = frames.integer("last", 0);

  const auto refine = root.child("refine");
  refine.allow_only({"tau_reproj", "tau_qc", "hypothesis_radius", "ransac"});
  auto& rc = job.run.refine;
  rc.ransac.tau_reproj = refine.num("tau_reproj", rc.ransac.tau_reproj);
  rc.tau_qc = refine.num("tau_qc", rc.tau_qc);
  rc.hypothesis_radius = refine.num("hypothesis_radius", rc.hypothesis_radius);
  const auto ransac = refine.child("ransac");
  ransac.allow_only({"mode", "iterations", "max_subset_size", "seed", "exhaustive_max_cameras"});
  rc.ransac.mode = parse_mode(ransac);
  rc.ransac.iterations = static_cast<int>(ransac.integer("iterations", rc.ransac.iterations));
  rc.ransac.max_subset_size = static_cast<int>(ransac.integer("max_subset_size", rc.ransac.max_subset_size));
  rc.ransac.seed = static_cast<std::uint64_t>(ransac.integer("seed", 0));
  rc.ransac.exhaustive_max_cameras =
      static_cast<int>(ransac.integer("exhaustive_max_cameras", rc.ransac.exhaustive_max_cameras));

  job.run.strict_window = root.flag("strict_window", false);
  job.run.workers = static_cast<int>(overrides.workers > 0 ? overrides.workers : root.integer("workers", 1));

  const auto client = root.child("client");
  job.client = client.raw();
  job.run.max_retries = static_cast<int>(client.integer("max_retries", 2));
  job.run.validate();

  const auto truth = root.child("truth");
  truth.allow_only({"points", "labels"});
  if (truth.has("points")) job.truth_points = resolve_path(job.base_dir, truth.str("points"));
  if (truth.has("labels")) job.truth_labels = resolve_path(job.base_dir, truth.str("labels"));

  json frames_eff = json::object();
  if (job.first_frame) frames_eff["first"] = *job.first_frame;
  if (job.last_frame) frames_eff["last"] = *job.last_frame;
  job.effective = {
      {"calibration", root.str("calibration")},
      {"centroids", root.str("centroids")},
      {"bboxes", root.str("bboxes")},
      {"seeds", root.str("seeds")},
      {"images", root.str("images", "")},
      {"ablation", pose::name_of(job.run.ablation)},
      {"frames", frames_eff},
      {"refine",
       {{"tau_reproj", rc.ransac.tau_reproj},
        {"tau_qc", rc.tau_qc},
        {"hypothesis_radius", rc.hypothesis_radius},
        {"ransac",
         {{"mode", mode_name(rc.ransac.mode)},
          {"iterations", rc.ransac.iterations},
          {"max_subset_size", rc.ransac.max_subset_size},
          {"seed", rc.ransac.seed},
          {"exhaustive_max_cameras", rc.ransac.exhaustive_max_cameras}}}}},
      {"strict_window", job.run.strict_window},
      {"workers", job.run.workers},
      {"client", job.client},
      {"prompt_version", pose::kPromptVersion}};
  job.effective["client"]["max_retries"] = job.run.max_retries;
  if (!job.effective["client"].contains("kind")) job.effective["client"]["kind"] = "oracle";
  return job;
}

std::string pose_digest(const PoseJob& job) {
  json d = job.effective;
  d.erase("workers");
  return perception::sha256_hex(d.dump());
}

}  // namespace etho::cli
