#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace etho::pose {

// The twelve labeled body keypoints, in canonical processing order.
enum class Keypoint : std::uint8_t {
  kEarL,
  kEarR,
  kBackTop,
  kBackMiddle,
  kBackBottom,
  kForepawL,
  kForepawR,
  kHindpawL,
  kHindpawR,
  kTailBase,
  kTailMiddle,
  kTailTip,
};

enum class Region : std::uint8_t { kEars, kBack, kPaws, kTail };

inline constexpr std::size_t kNumKeypoints = 12;
inline constexpr std::size_t kNumRegions = 4;

constexpr std::size_t index_of(Keypoint k) { return static_cast<std::size_t>(k); }
constexpr std::size_t index_of(Region r) { return static_cast<std::size_t>(r); }

const std::array<Keypoint, kNumKeypoints>& all_keypoints();
const std::array<Region, kNumRegions>& all_regions();

std::span<const Keypoint> region_keypoints(Region region);
Region region_of(Keypoint keypoint);

std::string_view name_of(Keypoint keypoint);
std::string_view name_of(Region region);
std::optional<Keypoint> parse_keypoint(std::string_view name);
std::optional<Region> parse_region(std::string_view name);

// Annotation palette for exemplar rendering (RGB).
struct Rgb {
  std::uint8_t r, g, b;
};
Rgb region_color(Region region);
// Numbered centroid markers.
inline constexpr Rgb kCentroidColor{255, 225, 25};

}  // namespace etho::pose
