#include "etho/pose/window.hpp"

#include <algorithm>
#include <limits>

#include "etho/error.hpp"

namespace etho::pose {

RollingWindow::RollingWindow(std::vector<ExemplarFrame> seeds) {
  if (seeds.size() != kCapacity) {
    throw ValidationError("exactly 3 seed frames are required, got " + std::to_string(seeds.size()));
  }
  for (auto& s : seeds) {
    validate_seed(s);
    push(std::move(s));
  }
}

void RollingWindow::push(ExemplarFrame frame) {
  if (!entries_.empty() && frame.frame_index() <= entries_.back().frame_index()) {
    throw ValidationError("rolling window frames must be strictly increasing (got " +
                          std::to_string(frame.frame_index()) + " after " +
                          std::to_string(entries_.back().frame_index()) + ")");
  }
  entries_.push_back(std::move(frame));
  while (entries_.size() > kCapacity) entries_.pop_front();
}

RegionBoxes regions_from_assignment(const FrameObservation& obs, const ViewAssignment& assignment,
                                    double margin) {
  RegionBoxes out;
  for (auto r : all_regions()) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    bool any = false;
    for (auto k : region_keypoints(r)) {
      const auto& slot = assignment[k];
      if (!slot.centroid) continue;
      auto c = obs.centroid(*slot.centroid);
      if (!c) continue;
      any = true;
      x0 = std::min(x0, c->x);
      y0 = std::min(y0, c->y);
      x1 = std::max(x1, c->x);
      y1 = std::max(y1, c->y);
    }
    out[index_of(r)] = any ? Rect{x0 - margin, y0 - margin, x1 + margin, y1 + margin}.clamped_to(obs.crop)
                           : obs.crop;
  }
  return out;
}

void validate_seed(const ExemplarFrame& seed) {
  const auto& st = seed.assignments;
  const std::string who = "seed frame " + std::to_string(seed.frame_index()) + ": ";
  if (st.frame_index != seed.frame_index()) throw ValidationError(who + "assignment frame index mismatch");
  if (seed.frame.views.empty()) throw ValidationError(who + "no views");
  for (const auto& [view, obs] : seed.frame.views) {
    auto it = st.views.find(view);
    if (it == st.views.end()) throw ValidationError(who + "view '" + view + "' has no labels");
    for (auto k : all_keypoints()) {
      const auto& c = it->second[k].centroid;
      if (c && !obs.centroid(*c)) {
        throw ValidationError(who + "view '" + view + "' keypoint " + std::string(name_of(k)) +
                              " references missing centroid " + std::to_string(*c));
      }
    }
    if (!it->second.injective()) {
      throw ValidationError(who + "view '" + view + "' assigns a centroid to two keypoints");
    }
  }
  for (const auto& [view, va] : st.views) {
    if (!seed.frame.views.contains(view)) throw ValidationError(who + "labels for unknown view '" + view + "'");
  }
}

}  // namespace etho::pose
