#include "etho/pose/schema.hpp"

namespace etho::pose {
namespace {

constexpr std::array<Keypoint, kNumKeypoints> kKeypoints = {
    Keypoint::kEarL,      Keypoint::kEarR,      Keypoint::kBackTop,   Keypoint::kBackMiddle,
    Keypoint::kBackBottom, Keypoint::kForepawL, Keypoint::kForepawR,  Keypoint::kHindpawL,
    Keypoint::kHindpawR,  Keypoint::kTailBase,  Keypoint::kTailMiddle, Keypoint::kTailTip,
};

constexpr std::array<Region, kNumRegions> kRegions = {Region::kEars, Region::kBack, Region::kPaws,
                                                      Region::kTail};

constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "ear_L",     "ear_R",     "back_top",  "back_middle", "back_bottom", "forepaw_L",
    "forepaw_R", "hindpaw_L", "hindpaw_R", "tail_base",   "tail_middle", "tail_tip",
};

constexpr std::array<std::string_view, kNumRegions> kRegionNames = {"ears", "back", "paws", "tail"};

// Keypoints are stored region-contiguous, so each region is a slice.
constexpr std::array<std::pair<std::size_t, std::size_t>, kNumRegions> kRegionSlices = {
    {{0, 2}, {2, 3}, {5, 4}, {9, 3}}};

}  // namespace

const std::array<Keypoint, kNumKeypoints>& all_keypoints() { return kKeypoints; }
const std::array<Region, kNumRegions>& all_regions() { return kRegions; }

std::span<const Keypoint> region_keypoints(Region region) {
  const auto [offset, count] = kRegionSlices[index_of(region)];
  return std::span<const Keypoint>(kKeypoints).subspan(offset, count);
}

Region region_of(Keypoint keypoint) {
  const auto i = index_of(keypoint);
  for (auto r : kRegions) {
    const auto [offset, count] = kRegionSlices[index_of(r)];
    if (i >= offset && i < offset + count) return r;
  }
  return Region::kTail;
}

std::string_view name_of(Keypoint keypoint) { return kKeypointNames[index_of(keypoint)]; }
std::string_view name_of(Region region) { return kRegionNames[index_of(region)]; }

std::optional<Keypoint> parse_keypoint(std::string_view name) {
  for (std::size_t i = 0; i < kNumKeypoints; ++i) {
    if (kKeypointNames[i] == name) return kKeypoints[i];
  }
  return std::nullopt;
}

std::optional<Region> parse_region(std::string_view name) {
  for (std::size_t i = 0; i < kNumRegions; ++i) {
    if (kRegionNames[i] == name) return kRegions[i];
  }
  return std::nullopt;
}

Rgb region_color(Region region) {
  switch (region) {
    case Region::kEars:
      return {230, 25, 75};
    case Region::kBack:
      return {60, 180, 75};
    case Region::kPaws:
      return {0, 130, 200};
    case Region::kTail:
      return {245, 130, 48};
  }
  return {255, 255, 255};
}

}  // namespace etho::pose
