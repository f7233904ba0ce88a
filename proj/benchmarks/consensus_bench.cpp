#include <utility>
#include <vector>

#include <benchmark/benchmark.h>

#include "etho/consensus/ransac.hpp"
#include "etho/consensus/refine.hpp"
#include "scene.hpp"

namespace {

using namespace etho;
using pose::Keypoint;

const etho::testing::Scene& scene() {
  static const auto s = etho::testing::make_scene(8, 1.0, 0.0, 77);
  return s;
}

void BM_RansacTriangulate(benchmark::State& state) {
  const auto& s = scene();
  const auto& frame = s.sim.frames.front();
  const auto obs = consensus::gather_observations(s.cameras, frame, s.sim.truth.at(frame.frame_index),
                                                  Keypoint::kBackMiddle);
  std::vector<geometry::Observation> corrupted = obs;
  corrupted.front().pixel.x += 80.0;
  consensus::RansacConfig cfg;
  cfg.mode = state.range(0) ? consensus::RansacConfig::Mode::kRandomized : consensus::RansacConfig::Mode::kExhaustive;
  for (auto _ : state) benchmark::DoNotOptimize(consensus::ransac_triangulate(corrupted, cfg));
  state.SetLabel(state.range(0) ? "randomized" : "exhaustive");
}
BENCHMARK(BM_RansacTriangulate)->Arg(0)->Arg(1);

void BM_RefineFrame(benchmark::State& state) {
  const auto& s = scene();
  const auto& frame = s.sim.frames.front();
  auto assignments = s.sim.truth.at(frame.frame_index);
  if (state.range(0)) {
    auto& v = assignments.views.begin()->second;
    std::swap(v[Keypoint::kEarL].centroid, v[Keypoint::kEarR].centroid);
  }
  const consensus::RefineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(consensus::refine_frame(assignments, frame, s.cameras, cfg));
  state.SetLabel(state.range(0) ? "one swap" : "clean");
}
BENCHMARK(BM_RefineFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
