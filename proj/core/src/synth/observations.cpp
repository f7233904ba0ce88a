#include "etho/synth/observations.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::synth {

void ObservationConfig::validate() const {
  if (!(noise_sigma >= 0.0)) throw ConfigError("observations.noise_sigma must be >= 0");
  if (!(occlusion >= 0.0 && occlusion <= 1.0)) throw ConfigError("observations.occlusion must be in [0,1]");
  if (!(bbox_margin >= 0.0)) throw ConfigError("observations.bbox_margin must be >= 0");
}

SimulatedSequence render_observations(const std::vector<Pose3D>& trajectory, const std::vector<CameraModel>& rig,
                                      const ObservationConfig& config, std::uint64_t seed, long long first_frame) {
  config.validate();
  SimulatedSequence out;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const long long f = first_frame + static_cast<long long>(t);
    const auto& pose3 = trajectory[t];
    pose::FrameBundle bundle;
    bundle.frame_index = f;
    pose::AssignmentState truth;
    truth.frame_index = f;
    for (const auto& cam : rig) {
      std::mt19937_64 rng(util::stream_seed(seed, {static_cast<std::uint64_t>(f), util::hash_string(cam.name)}));
      std::normal_distribution<double> noise(0.0, 1.0);
      std::uniform_real_distribution<double> u01(0.0, 1.0);

      pose::FrameObservation obs;
      obs.frame_index = f;
      obs.view = cam.name;
      double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
      std::vector<std::pair<pose::Keypoint, geometry::PixelPoint>> visible;
      for (auto k : pose::all_keypoints()) {
        const auto& wp = pose3[pose::index_of(k)];
        const double noise_x = config.noise_sigma * noise(rng);
        const double noise_y = config.noise_sigma * noise(rng);
        const bool occluded = u01(rng) < config.occlusion;
        if (cam.to_camera(wp).z() <= geometry::kMinDepth) continue;
        const auto px = geometry::project(cam, wp);
        x0 = std::min(x0, px.x);
        y0 = std::min(y0, px.y);
        x1 = std::max(x1, px.x);
        y1 = std::max(y1, px.y);
        const geometry::PixelPoint noisy{px.x + noise_x, px.y + noise_y};
        if (occluded || !cam.in_image(noisy)) continue;
        visible.emplace_back(k, noisy);
      }
      const pose::Rect image = pose::full_image(cam.image_size);
      obs.body_bbox = pose::Rect{x0 - config.bbox_margin, y0 - config.bbox_margin, x1 + config.bbox_margin,
                                 y1 + config.bbox_margin}
                          .clamped_to(image);
      obs.crop = pose::compute_crop(obs.body_bbox, cam.image_size);

      std::vector<std::size_t> order(visible.size());
      std::iota(order.begin(), order.end(), 0);
      if (config.shuffle) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      }
      pose::ViewAssignment va;
      for (auto k : pose::all_keypoints()) va[k].provenance = pose::Provenance::kSeed;
      for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const auto& [k, px] = visible[order[idx]];
        obs.centroids.push_back(px);
        va[k].centroid = static_cast<int>(idx);
      }
      out.regions[{f, cam.name}] = pose::regions_from_assignment(obs, va);
      truth.views[cam.name] = va;
      bundle.views.emplace(cam.name, std::move(obs));
    }
    out.frames.push_back(std::move(bundle));
    out.truth[f] = std::move(truth);
    out.points[f] = pose3;
  }
  return out;
}

perception::PoseTruth pose_truth(const SimulatedSequence& seq) {
  perception::PoseTruth truth;
  for (const auto& [f, st] : seq.truth) {
    for (const auto& [view, va] : st.views) {
      auto& m = truth.assignments[{f, view}];
      for (auto k : pose::all_keypoints()) {
        if (va[k].centroid) m[std::string(pose::name_of(k))] = *va[k].centroid;
      }
    }
  }
  for (const auto& [key, boxes] : seq.regions) {
    for (auto r : pose::all_regions()) {
      const auto& b = boxes[pose::index_of(r)];
      truth.regions[{key.first, key.second, std::string(pose::name_of(r))}] = {b.x0, b.y0, b.x1, b.y1};
    }
  }
  return truth;
}

std::string point_rows(long long frame, const Pose3D& p) {
  std::string out;
  for (auto k : pose::all_keypoints()) {
    const auto& w = p[pose::index_of(k)];
    out += std::to_string(frame) + "," + std::string(pose::name_of(k)) + "," + util::fmt_double(w.x) + "," +
           util::fmt_double(w.y) + "," + util::fmt_double(w.z) + "\n";
  }
  return out;
}

}  // namespace etho::synth
