#include "config.hpp"

#include <cmath>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::cli {

using nlohmann::json;

namespace {

const json& empty_object() {
  static const json kEmpty = json::object();
  return kEmpty;
}

}  // namespace

ConfigNode::ConfigNode(const json& obj, std::string path) : obj_(&obj), path_(std::move(path)) {
  if (!obj.is_object()) {
    throw ConfigError(path_.empty() ? "config must be a JSON object" : "config key '" + path_ + "' must be an object");
  }
}

std::string ConfigNode::key_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

void ConfigNode::allow_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : obj_->items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) throw ConfigError("unknown config key '" + key_path(k) + "'");
  }
}

const json* ConfigNode::at(std::string_view key) const {
  auto it = obj_->find(std::string(key));
  if (it == obj_->end() || it->is_null()) return nullptr;
  return &*it;
}

bool ConfigNode::has(std::string_view key) const { return at(key) != nullptr; }

std::string ConfigNode::str(std::string_view key) const {
  const json* v = at(key);
  if (!v) throw ConfigError("config key '" + key_path(key) + "' is required");
  if (!v->is_string()) throw ConfigError("config key '" + key_path(key) + "' must be a string");
  return v->get<std::string>();
}

std::string ConfigNode::str(std::string_view key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

double ConfigNode::num(std::string_view key) const {
  const json* v = at(key);
  if (!v) throw ConfigError("config key '" + key_path(key) + "' is required");
  if (!v->is_number()) throw ConfigError("config key '" + key_path(key) + "' must be a number");
  return v->get<double>();
}

double ConfigNode::num(std::string_view key, double fallback) const { return has(key) ? num(key) : fallback; }

long long ConfigNode::integer(std::string_view key, long long fallback) const {
  const json* v = at(key);
  if (!v) return fallback;
  if (v->is_number_integer()) return v->get<long long>();
  if (v->is_number_float()) {
    const double d = v->get<double>();
    if (std::floor(d) == d) return static_cast<long long>(d);
  }
  throw ConfigError("config key '" + key_path(key) + "' must be an integer");
}

bool ConfigNode::flag(std::string_view key, bool fallback) const {
  const json* v = at(key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError("config key '" + key_path(key) + "' must be true or false");
  return v->get<bool>();
}

ConfigNode ConfigNode::child(std::string_view key) const {
  const json* v = at(key);
  if (!v) return ConfigNode(empty_object(), key_path(key));
  return ConfigNode(*v, key_path(key));
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = util::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

}  // namespace etho::cli
