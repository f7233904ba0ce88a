#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace etho::cli {

struct OutputSpec {
  std::string name;    // file name inside the run directory
  std::string header;  // first line; empty for headerless files
};

// Append-only run outputs with a manifest of completed work items.
//
// manifest.json records the configuration digest, the number of completed
// items, the byte length of every output after the last completed item and
// a free-form state object. Reopening a run truncates each file back to its
// recorded length, so an interrupted item leaves no trace.
class ResumableRun {
 public:
  // Starts fresh when no manifest exists (or `fresh` is set), otherwise
  // resumes. Throws ConfigError when the manifest digest differs.
  ResumableRun(std::filesystem::path dir, std::string digest, std::vector<OutputSpec> outputs, bool fresh);

  long long completed() const { return completed_; }
  bool resumed() const { return resumed_; }
  const nlohmann::json& state() const { return state_; }
  const std::filesystem::path& dir() const { return dir_; }

  void append(const std::string& name, std::string_view text);
  // Flushes pending appends, then rewrites the manifest.
  void commit(long long completed, nlohmann::json state);

 private:
  void write_manifest() const;

  std::filesystem::path dir_;
  std::string digest_;
  std::vector<OutputSpec> outputs_;
  std::map<std::string, std::string> pending_;
  std::map<std::string, std::uintmax_t> offsets_;
  long long completed_ = 0;
  bool resumed_ = false;
  nlohmann::json state_ = nlohmann::json::object();
};

inline constexpr const char* kManifestName = "manifest.json";

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace etho::cli
