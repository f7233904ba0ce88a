#include "etho/pose/frame.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "etho/error.hpp"

namespace etho::pose {

Rect Rect::clamped_to(const Rect& b) const {
  return {std::clamp(x0, b.x0, b.x1), std::clamp(y0, b.y0, b.y1), std::clamp(x1, b.x0, b.x1),
          std::clamp(y1, b.y0, b.y1)};
}

Rect compute_crop(const Rect& bbox, const ImageSize& image_size) {
  if (bbox.empty()) throw EmptyBBox("body bounding box is empty");
  const double pad_x = kCropPadPixels + kCropPadFraction * bbox.width();
  const double pad_y = kCropPadPixels + kCropPadFraction * bbox.height();
  const Rect padded{bbox.x0 - pad_x, bbox.y0 - pad_y, bbox.x1 + pad_x, bbox.y1 + pad_y};
  return padded.clamped_to(full_image(image_size));
}

std::optional<PixelPoint> FrameObservation::centroid(int index) const {
  if (index < 0 || index >= static_cast<int>(centroids.size())) return std::nullopt;
  return centroids[static_cast<std::size_t>(index)];
}

std::vector<int> FrameObservation::centroids_in(const Rect& box) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (box.contains(centroids[i])) out.push_back(static_cast<int>(i));
  }
  return out;
}

void FrameObservation::validate(const ImageSize& image_size) const {
  const std::string who = "frame " + std::to_string(frame_index) + " view '" + view + "': ";
  if (body_bbox.empty()) throw ValidationError(who + "empty body bbox");
  if (!crop.contains(body_bbox)) throw ValidationError(who + "crop does not contain body bbox");
  if (!full_image(image_size).contains(crop)) throw ValidationError(who + "crop exceeds image");
  for (const auto& c : centroids) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw ValidationError(who + "non-finite centroid");
  }
}

std::string_view name_of(Provenance p) {
  switch (p) {
    case Provenance::kSeed:
      return "seed";
    case Provenance::kStage2:
      return "stage-2";
    case Provenance::kStage3:
      return "stage-3";
    case Provenance::kStage4:
      return "stage-4";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  for (auto p : {Provenance::kSeed, Provenance::kStage2, Provenance::kStage3, Provenance::kStage4}) {
    if (name_of(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<Keypoint> ViewAssignment::owner_of(int centroid) const {
  for (auto k : all_keypoints()) {
    if ((*this)[k].centroid == centroid) return k;
  }
  return std::nullopt;
}

bool ViewAssignment::injective() const {
  std::set<int> used;
  for (const auto& s : slots) {
    if (s.centroid && !used.insert(*s.centroid).second) return false;
  }
  return true;
}

void AssignmentState::validate_injective() const {
  for (const auto& [view, va] : views) {
    if (!va.injective()) {
      throw ValidationError("frame " + std::to_string(frame_index) + " view '" + view +
                            "': centroid assigned to more than one keypoint");
    }
  }
}

bool AssignmentState::same_assignments(const AssignmentState& other) const {
  if (views.size() != other.views.size()) return false;
  for (const auto& [view, va] : views) {
    auto it = other.views.find(view);
    if (it == other.views.end()) return false;
    for (auto k : all_keypoints()) {
      if (va[k].centroid != it->second[k].centroid) return false;
    }
  }
  return true;
}

}  // namespace etho::pose
