#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "etho/consensus/refine.hpp"
#include "etho/perception/oracle.hpp"
#include "etho/pose/window.hpp"
#include "etho/synth/observations.hpp"
#include "etho/synth/rig.hpp"
#include "etho/synth/skeleton.hpp"

namespace etho::testing {

// A simulated recording: rig, trajectory, observations and ground truth.
struct Scene {
  std::vector<geometry::CameraModel> rig;
  consensus::CameraSet cameras;
  std::vector<synth::Pose3D> trajectory;
  synth::SimulatedSequence sim;
  std::shared_ptr<perception::GroundTruth> truth;

  // Exemplars built from the ground truth of the first three frames.
  std::vector<pose::ExemplarFrame> seeds() const {
    std::vector<pose::ExemplarFrame> out;
    for (int i = 0; i < 3; ++i) {
      pose::ExemplarFrame e;
      e.frame = sim.frames[static_cast<std::size_t>(i)];
      e.assignments = sim.truth.at(e.frame.frame_index);
      for (const auto& [view, obs] : e.frame.views) {
        e.regions[view] = pose::regions_from_assignment(obs, e.assignments.views.at(view));
      }
      out.push_back(std::move(e));
    }
    return out;
  }

  std::vector<pose::FrameBundle> after_seeds() const { return {sim.frames.begin() + 3, sim.frames.end()}; }
};

inline Scene make_scene(int frames, double noise, double occlusion, std::uint64_t seed) {
  Scene s;
  s.rig = synth::generate_rig(synth::RigConfig{}, seed + 1);
  s.cameras = consensus::index_cameras(s.rig);
  s.trajectory = synth::generate_skeleton_trajectory(frames, synth::SkeletonConfig{}, seed + 2);
  synth::ObservationConfig oc;
  oc.noise_sigma = noise;
  oc.occlusion = occlusion;
  s.sim = synth::render_observations(s.trajectory, s.rig, oc, seed + 3);
  s.truth = std::make_shared<perception::GroundTruth>();
  s.truth->pose = synth::pose_truth(s.sim);
  return s;
}

}  // namespace etho::testing
