#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace etho::behavior {

// Per-animal feature matrix, one row per frame.
struct FeatureSequence {
  std::string animal;
  double fps = 10.0;
  Eigen::MatrixXd x;  // T x D

  long long frames() const { return x.rows(); }
  // Throws ValidationError on T < 2, D < 1, non-finite entries or fps <= 0.
  void validate() const;
};

// Checks every sequence and that all share T and fps, with unique animal ids.
void validate_session(const std::vector<FeatureSequence>& sequences);

// Text format:
//   # etho-features v1
//   animal <id> fps <hz> T <frames> D <dims>
//   <T lines of D whitespace-separated numbers>
//   ... one block per animal
std::vector<FeatureSequence> read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const std::vector<FeatureSequence>& sequences);
std::string format_features(const std::vector<FeatureSequence>& sequences);

}  // namespace etho::behavior
