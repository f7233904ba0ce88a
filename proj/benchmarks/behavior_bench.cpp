#include <benchmark/benchmark.h>

#include "etho/behavior/dec.hpp"
#include "etho/behavior/segments.hpp"
#include "etho/synth/features.hpp"

namespace {

using namespace etho;

const synth::FeatureSession& session() {
  static const auto s = synth::generate_feature_session(synth::FeatureSessionConfig{}, 5);
  return s;
}

behavior::DecConfig dec_config() {
  behavior::DecConfig cfg;
  cfg.k = 5;
  cfg.seed = 5;
  return cfg;
}

void BM_DecFit(benchmark::State& state) {
  const auto& s = session();
  const auto cfg = dec_config();
  for (auto _ : state) benchmark::DoNotOptimize(behavior::dec_fit(s.sequences, cfg));
}
BENCHMARK(BM_DecFit)->Unit(benchmark::kMillisecond);

void BM_SoftAssign(benchmark::State& state) {
  const auto& s = session();
  const auto model = behavior::dec_fit(s.sequences, dec_config());
  for (auto _ : state) benchmark::DoNotOptimize(behavior::soft_assign(s.sequences.front().x, model.centroids));
}
BENCHMARK(BM_SoftAssign);

void BM_SegmentExtract(benchmark::State& state) {
  const auto& s = session();
  const auto model = behavior::dec_fit(s.sequences, dec_config());
  for (auto _ : state) benchmark::DoNotOptimize(behavior::segment_extract(s.sequences.front(), model, 0.5));
}
BENCHMARK(BM_SegmentExtract);

}  // namespace
