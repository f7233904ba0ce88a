#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etho/geometry/camera.hpp"
#include "etho/pose/schema.hpp"

namespace etho::pose {

using geometry::ImageSize;
using geometry::PixelPoint;

// Axis-aligned rectangle in full-frame pixel coordinates, [x0,x1) x [y0,y1).
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool empty() const { return !(x1 > x0) || !(y1 > y0); }
  bool contains(const PixelPoint& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool contains(const Rect& r) const { return r.x0 >= x0 && r.y0 >= y0 && r.x1 <= x1 && r.y1 <= y1; }
  Rect clamped_to(const Rect& bounds) const;
  Rect translated(double dx, double dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect full_image(const ImageSize& size) {
  return {0.0, 0.0, static_cast<double>(size.width), static_cast<double>(size.height)};
}

// Pads the body box by 16 px plus 5% of its width (horizontally) and height
// (vertically) on every side, then clamps to the image. Throws EmptyBBox.
Rect compute_crop(const Rect& body_bbox, const ImageSize& image_size);

inline constexpr double kCropPadPixels = 16.0;
inline constexpr double kCropPadFraction = 0.05;

// One camera view of one frame: identity-free centroids whose local index is
// their position in `centroids`.
struct FrameObservation {
  long long frame_index = 0;
  std::string view;
  Rect body_bbox;
  Rect crop;
  std::vector<PixelPoint> centroids;
  std::string image_ref;

  std::optional<PixelPoint> centroid(int index) const;
  std::vector<int> centroids_in(const Rect& box) const;
  void validate(const ImageSize& image_size) const;
};

// All views of one synchronized frame, keyed by camera name.
struct FrameBundle {
  long long frame_index = 0;
  std::map<std::string, FrameObservation> views;
};

enum class Provenance : std::uint8_t { kSeed, kStage2, kStage3, kStage4 };
std::string_view name_of(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view name);

struct Slot {
  std::optional<int> centroid;
  Provenance provenance = Provenance::kStage2;
  bool flagged = false;

  friend bool operator==(const Slot&, const Slot&) = default;
};

// Keypoint -> centroid mapping for one view. Every keypoint has a slot.
struct ViewAssignment {
  std::array<Slot, kNumKeypoints> slots{};

  Slot& operator[](Keypoint k) { return slots[index_of(k)]; }
  const Slot& operator[](Keypoint k) const { return slots[index_of(k)]; }
  std::optional<Keypoint> owner_of(int centroid) const;
  bool injective() const;

  friend bool operator==(const ViewAssignment&, const ViewAssignment&) = default;
};

struct AssignmentState {
  long long frame_index = 0;
  std::map<std::string, ViewAssignment> views;
  std::vector<std::string> flags;

  // Throws ValidationError if any view assigns one centroid twice.
  void validate_injective() const;
  bool same_assignments(const AssignmentState& other) const;
};

}  // namespace etho::pose
