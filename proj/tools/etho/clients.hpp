#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "etho/perception/client.hpp"

namespace etho::cli {

// Builds the transport named by a config "client" block:
//   {"kind": "oracle", "labels": ..., "regions": ..., "corruption": {...}}   pose runs
//   {"kind": "oracle", "behavior_truth": ..., "corruption": {...}}           behavior runs
//   {"kind": "live", "endpoint": ..., "model": ..., ...}
//   {"kind": "scripted", "replies": ["...", ...]}
//   {"kind": "unavailable"}
// plus "max_retries" (default 2) for schema re-prompts.
struct ClientSetup {
  std::string kind;
  int max_retries = 2;
  std::shared_ptr<perception::Transport> transport;
  std::unique_ptr<perception::PerceptionClient> client;
  nlohmann::json effective;  // the block with defaults filled in
};

ClientSetup make_client(const ConfigNode& node, const std::filesystem::path& base_dir);

}  // namespace etho::cli
