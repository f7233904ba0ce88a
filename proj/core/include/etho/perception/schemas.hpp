#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace etho::perception {

// Response schema identifiers.
inline constexpr std::string_view kRegionBoxSchema = "region-box/v1";
inline constexpr std::string_view kAssignSchema = "region-assign/v1";
inline constexpr std::string_view kReconcileSchema = "reconcile/v1";
inline constexpr std::string_view kCaptionSchema = "caption/v1";
inline constexpr std::string_view kMergeSchema = "merge/v1";

inline constexpr int kMaxLabelWords = 6;

bool known_schema(std::string_view schema_id);

// Pulls the first JSON object out of a model reply, tolerating code fences
// and surrounding prose.
std::optional<nlohmann::json> extract_json(std::string_view raw);

// Returns a human-readable violation, or nullopt when the payload conforms.
// `context` is the request context (allowed keypoints, candidates, clip ids).
std::optional<std::string> validate_payload(std::string_view schema_id, const nlohmann::json& payload,
                                            const nlohmann::json& context);

int count_words(std::string_view text);

}  // namespace etho::perception
