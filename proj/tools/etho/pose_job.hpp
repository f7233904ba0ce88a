#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "etho/pose/pipeline.hpp"

namespace etho::cli {

struct PoseOverrides {
  std::string ablation;
  std::string output;
  int workers = 0;
};

// Everything a pose run needs, resolved from one config file plus flags.
struct PoseJob {
  std::filesystem::path base_dir;
  std::filesystem::path calibration;
  std::filesystem::path centroids;
  std::filesystem::path bboxes;
  std::filesystem::path seeds;
  std::string images;  // image path template, may be empty
  std::filesystem::path output;
  std::optional<long long> first_frame;
  std::optional<long long> last_frame;
  pose::PoseRunConfig run;
  nlohmann::json client;  // raw client block
  std::optional<std::filesystem::path> truth_points;
  std::optional<std::filesystem::path> truth_labels;
  // Normalized config echoed into the output directory. Input paths appear
  // as written in the config file.
  nlohmann::json effective;
};

PoseJob load_pose_job(const std::filesystem::path& config_path, const PoseOverrides& overrides);

// Digest of the settings that determine run outputs (worker count excluded).
std::string pose_digest(const PoseJob& job);

}  // namespace etho::cli
