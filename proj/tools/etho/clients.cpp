#include "clients.hpp"

#include "etho/error.hpp"
#include "etho/perception/live.hpp"
#include "etho/perception/oracle.hpp"
#include "etho/pose/io.hpp"
#include "etho/synth/features.hpp"

namespace etho::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

perception::CorruptionSpec corruption_of(const ConfigNode& node) {
  node.allow_only({"p_swap", "box_jitter", "p_drop", "seed"});
  perception::CorruptionSpec c;
  c.p_swap = node.num("p_swap", 0.0);
  c.box_jitter = node.num("box_jitter", 0.0);
  c.p_drop = node.num("p_drop", 0.0);
  c.seed = static_cast<std::uint64_t>(node.integer("seed", 0));
  c.validate();
  return c;
}

}  // namespace

ClientSetup make_client(const ConfigNode& node, const fs::path& base_dir) {
  ClientSetup out;
  out.kind = node.str("kind", "oracle");
  const auto retries = node.integer("max_retries", 2);
  if (retries < 0) throw ConfigError("config key '" + node.key_path("max_retries") + "' must be >= 0");
  out.max_retries = static_cast<int>(retries);
  out.effective = node.raw();
  out.effective["kind"] = out.kind;
  out.effective["max_retries"] = out.max_retries;

  if (out.kind == "oracle") {
    node.allow_only({"kind", "max_retries", "labels", "regions", "behavior_truth", "corruption"});
    auto truth = std::make_shared<perception::GroundTruth>();
    if (node.has("labels") || node.has("regions")) {
      truth->pose = pose::read_pose_truth(resolve_path(base_dir, node.str("labels")),
                                          resolve_path(base_dir, node.str("regions")));
    }
    if (node.has("behavior_truth")) {
      truth->behavior = synth::behavior_truth_from_json(
          read_json_file(resolve_path(base_dir, node.str("behavior_truth"))));
    }
    const auto spec = corruption_of(node.child("corruption"));
    out.effective["corruption"] = {
        {"p_swap", spec.p_swap}, {"box_jitter", spec.box_jitter}, {"p_drop", spec.p_drop}, {"seed", spec.seed}};
    out.transport = std::make_shared<perception::OracleTransport>(truth, spec);
  } else if (out.kind == "live") {
    json block = node.raw();
    if (block.contains("cassette") && block["cassette"].contains("path")) {
      block["cassette"]["path"] = resolve_path(base_dir, block["cassette"]["path"].get<std::string>()).string();
    }
    out.transport = std::make_shared<perception::HttpTransport>(perception::parse_live_config(block));
  } else if (out.kind == "scripted") {
    node.allow_only({"kind", "max_retries", "replies"});
    const auto& raw = node.raw();
    if (!raw.contains("replies") || !raw["replies"].is_array() || raw["replies"].empty()) {
      throw ConfigError("config key '" + node.key_path("replies") + "' must be a non-empty array of strings");
    }
    std::vector<std::string> replies;
    for (const auto& r : raw["replies"]) {
      if (!r.is_string()) throw ConfigError("config key '" + node.key_path("replies") + "' holds a non-string");
      replies.push_back(r.get<std::string>());
    }
    out.transport = std::make_shared<perception::ScriptedTransport>(std::move(replies));
  } else if (out.kind == "unavailable") {
    node.allow_only({"kind", "max_retries"});
    out.transport = std::make_shared<perception::UnavailableTransport>();
  } else {
    throw ConfigError("config key '" + node.key_path("kind") + "' must be oracle, live, scripted or unavailable");
  }
  out.client = std::make_unique<perception::PerceptionClient>(out.transport);
  return out;
}

}  // namespace etho::cli
