#pragma once

#include <functional>
#include <span>

#include "etho/geometry/camera.hpp"

namespace etho::geometry {

struct Observation {
  std::reference_wrapper<const CameraModel> camera;
  PixelPoint pixel;
};

// Ratio of largest to second-smallest singular value above which the stacked
// DLT system is treated as rank deficient.
inline constexpr double kDltConditionLimit = 1e10;

// Linear triangulation in normalized image coordinates and a world frame
// centered on the cameras. Each view contributes the rows x*P3 - P1 and
// y*P3 - P2 scaled by the focal length; the solution is the right singular
// vector of the smallest singular value. A second solve weights each view by
// the inverse depth of the first estimate.
// Throws InsufficientViews (< 2 observations) or DegenerateGeometry.
WorldPoint triangulate_dlt(std::span<const Observation> observations);

}  // namespace etho::geometry
