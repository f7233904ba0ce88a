#include "etho/perception/schemas.hpp"

#include <cmath>
#include <map>
#include <set>

#include "etho/util/text.hpp"

namespace etho::perception {
namespace {

using nlohmann::json;

std::optional<std::string> check_box(const json& p) {
  if (!p.is_object() || !p.contains("box")) return "expected an object with key 'box'";
  const auto& b = p["box"];
  if (!b.is_array() || b.size() != 4) return "'box' must be [x0, y0, x1, y1]";
  for (const auto& v : b) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) return "'box' entries must be finite numbers";
  }
  if (!(b[2].get<double>() > b[0].get<double>()) || !(b[3].get<double>() > b[1].get<double>())) {
    return "'box' must satisfy x1 > x0 and y1 > y0";
  }
  return std::nullopt;
}

std::optional<std::string> check_assignments(const json& p, const json& ctx) {
  if (!p.is_object() || !p.contains("assignments") || !p["assignments"].is_object()) {
    return "expected an object with key 'assignments' mapping keypoint names to centroid numbers";
  }
  const auto& a = p["assignments"];
  std::set<std::string> wanted;
  for (const auto& k : ctx.value("keypoints", json::array())) wanted.insert(k.get<std::string>());
  std::set<int> allowed;
  for (const auto& c : ctx.value("candidates", json::array())) allowed.insert(c.get<int>());
  for (const auto& name : wanted) {
    if (!a.contains(name)) return "missing keypoint '" + name + "'";
  }
  std::set<int> used;
  for (const auto& [name, v] : a.items()) {
    if (!wanted.contains(name)) return "unexpected keypoint '" + name + "'";
    if (v.is_null()) continue;
    if (!v.is_number_integer()) return "value for '" + name + "' must be a centroid number or null";
    const int c = v.get<int>();
    if (!allowed.contains(c)) return "centroid " + std::to_string(c) + " is not a candidate";
    if (!used.insert(c).second) return "duplicate centroid " + std::to_string(c);
  }
  return std::nullopt;
}

std::optional<std::string> check_caption(const json& p) {
  if (!p.is_object()) return "expected an object with keys 'label' and 'description'";
  if (!p.contains("label") || !p["label"].is_string()) return "missing string 'label'";
  if (!p.contains("description") || !p["description"].is_string()) return "missing string 'description'";
  const auto label = p["label"].get<std::string>();
  const int words = count_words(label);
  if (words == 0) return "'label' is empty";
  if (words > kMaxLabelWords) return "'label' has more than 6 words";
  if (util::trim(p["description"].get<std::string>()).empty()) return "'description' is empty";
  return std::nullopt;
}

std::optional<std::string> check_merge(const json& p, const json& ctx) {
  if (!p.is_object() || !p.contains("segments") || !p["segments"].is_array()) {
    return "expected an object with array 'segments'";
  }
  std::vector<int> ids;
  for (const auto& c : ctx.value("clips", json::array())) ids.push_back(c.at("id").get<int>());
  std::map<int, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;

  const auto& segs = p["segments"];
  if (segs.empty()) return "'segments' is empty";
  std::map<std::size_t, std::size_t> owner;  // clip position -> segment
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto& seg = segs[s];
    const std::string where = "segment " + std::to_string(s);
    if (!seg.is_object()) return where + " is not an object";
    if (!seg.contains("clips") || !seg["clips"].is_array() || seg["clips"].empty()) {
      return where + " needs a non-empty 'clips' array";
    }
    if (!seg.contains("label") || !seg["label"].is_string() ||
        util::trim(seg["label"].get<std::string>()).empty()) {
      return where + " needs a non-empty 'label'";
    }
    if (!seg.contains("description") || !seg["description"].is_string() ||
        util::trim(seg["description"].get<std::string>()).empty()) {
      return where + " needs a non-empty 'description'";
    }
    std::optional<std::size_t> prev;
    std::size_t first = 0;
    for (const auto& c : seg["clips"]) {
      if (!c.is_number_integer()) return where + " has a non-integer clip id";
      const int id = c.get<int>();
      auto it = pos.find(id);
      if (it == pos.end()) return "unknown clip id " + std::to_string(id);
      if (auto o = owner.find(it->second); o != owner.end()) {
        return "overlap: clip " + std::to_string(id) + " appears in segments " +
               std::to_string(o->second) + " and " + std::to_string(s);
      }
      owner[it->second] = s;
      if (prev && it->second != *prev + 1) {
        return "non-consecutive: " + where + " skips from clip " + std::to_string(ids[*prev]) +
               " to clip " + std::to_string(id);
      }
      if (!prev) first = it->second;
      prev = it->second;
    }
    spans.emplace_back(first, *prev);
  }
  std::size_t expect = 0;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (spans[s].first != expect) {
      if (spans[s].first > expect && !owner.contains(expect)) {
        return "gap: clip " + std::to_string(ids[expect]) + " is not covered";
      }
      return "non-consecutive: segment " + std::to_string(s) + " is out of temporal order";
    }
    expect = spans[s].second + 1;
  }
  if (expect != ids.size()) return "gap: clip " + std::to_string(ids[expect]) + " is not covered";
  return std::nullopt;
}

}  // namespace

bool known_schema(std::string_view id) {
  return id == kRegionBoxSchema || id == kAssignSchema || id == kReconcileSchema ||
         id == kCaptionSchema || id == kMergeSchema;
}

int count_words(std::string_view text) {
  int words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

std::optional<json> extract_json(std::string_view raw) {
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  auto parsed = json::parse(raw.substr(open, close - open + 1), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

std::optional<std::string> validate_payload(std::string_view schema_id, const json& payload,
                                            const json& context) {
  if (schema_id == kRegionBoxSchema) return check_box(payload);
  if (schema_id == kAssignSchema || schema_id == kReconcileSchema) {
    return check_assignments(payload, context);
  }
  if (schema_id == kCaptionSchema) return check_caption(payload);
  if (schema_id == kMergeSchema) return check_merge(payload, context);
  return "unknown schema '" + std::string(schema_id) + "'";
}

}  // namespace etho::perception
