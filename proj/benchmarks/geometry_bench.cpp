#include <vector>

#include <benchmark/benchmark.h>

#include "etho/geometry/triangulation.hpp"
#include "etho/synth/rig.hpp"

namespace {

using namespace etho;

void BM_TriangulateDlt(benchmark::State& state) {
  const auto rig = synth::generate_rig(synth::RigConfig{}, 3);
  const int views = static_cast<int>(state.range(0));
  const geometry::WorldPoint point{10.0, -20.0, 30.0};
  std::vector<geometry::Observation> obs;
  for (int i = 0; i < views; ++i) {
    const auto& cam = rig[static_cast<std::size_t>(i) % rig.size()];
    obs.push_back({cam, geometry::project(cam, point)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(geometry::triangulate_dlt(obs));
}
BENCHMARK(BM_TriangulateDlt)->Arg(2)->Arg(4)->Arg(6);

}  // namespace
