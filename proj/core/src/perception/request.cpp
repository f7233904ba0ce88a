#include "etho/perception/request.hpp"

#include "etho/error.hpp"
#include "etho/perception/schemas.hpp"

namespace etho::perception {

std::string_view name_of(Task task) {
  switch (task) {
    case Task::kRegionDetect:
      return "region-detect";
    case Task::kRegionAssign:
      return "region-assign";
    case Task::kReconcile:
      return "reconcile";
    case Task::kCaption:
      return "caption";
    case Task::kMerge:
      return "merge";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (auto t : {Task::kRegionDetect, Task::kRegionAssign, Task::kReconcile, Task::kCaption,
                 Task::kMerge}) {
    if (name_of(t) == name) return t;
  }
  return std::nullopt;
}

bool is_vision_task(Task task) { return task != Task::kMerge; }

void PerceptionRequest::validate() const {
  if (!known_schema(schema_id)) throw ValidationError("unknown response schema '" + schema_id + "'");
  if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
  if (is_vision_task(task) && attachments.empty()) {
    throw ValidationError(std::string(name_of(task)) + " request needs at least one attachment");
  }
  if (!is_vision_task(task) && !attachments.empty()) {
    throw ValidationError("merge requests are text-only");
  }
  if (!context.is_object()) throw ValidationError("request context must be an object");
}

}  // namespace etho::perception
