#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace etho::cli {

// Typed, read-only view of one object in a JSON config file. Every error
// names the full dotted key so operators can find it.
class ConfigNode {
 public:
  ConfigNode(const nlohmann::json& obj, std::string path);

  // Rejects keys outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;

  bool has(std::string_view key) const;
  std::string key_path(std::string_view key) const;

  std::string str(std::string_view key) const;
  std::string str(std::string_view key, const std::string& fallback) const;
  double num(std::string_view key) const;
  double num(std::string_view key, double fallback) const;
  long long integer(std::string_view key, long long fallback) const;
  bool flag(std::string_view key, bool fallback) const;

  // A nested object; an empty one when the key is absent.
  ConfigNode child(std::string_view key) const;
  const nlohmann::json& raw() const { return *obj_; }

 private:
  const nlohmann::json* at(std::string_view key) const;

  const nlohmann::json* obj_;
  std::string path_;
};

// Parses a JSON file; IoError when unreadable, ConfigError on bad syntax.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Relative paths in a config file are taken relative to the file itself.
std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& value);

}  // namespace etho::cli
