#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace etho::perception {

enum class Task { kRegionDetect, kRegionAssign, kReconcile, kCaption, kMerge };

std::string_view name_of(Task task);
std::optional<Task> parse_task(std::string_view name);
bool is_vision_task(Task task);

struct Color {
  std::uint8_t r = 255, g = 255, b = 255;
};

struct OverlayBox {
  std::array<double, 4> box{};  // x0, y0, x1, y1 in source-image pixels
  Color color;
  std::string label;
};

struct OverlayMarker {
  double x = 0.0;
  double y = 0.0;
  std::string label;
  Color color;
};

// Reference to an image on disk plus the annotations to draw before upload.
struct Attachment {
  std::string path;
  std::optional<std::array<double, 4>> crop;
  std::vector<OverlayBox> boxes;
  std::vector<OverlayMarker> markers;
  std::string caption;  // e.g. "exemplar frame 41"
};

struct PerceptionRequest {
  Task task = Task::kRegionDetect;
  std::string prompt;
  std::vector<Attachment> attachments;
  std::string schema_id;
  int max_retries = 2;
  // Machine-readable task parameters; rendered into the prompt for live
  // models and read directly by oracle clients and schema validators.
  nlohmann::json context = nlohmann::json::object();

  // Throws ValidationError for an unknown schema, wrong attachment
  // cardinality, or negative max_retries.
  void validate() const;
};

struct PerceptionResponse {
  std::string raw_text;
  nlohmann::json payload;
  int attempts = 0;
  std::chrono::milliseconds latency{0};
};

}  // namespace etho::perception
