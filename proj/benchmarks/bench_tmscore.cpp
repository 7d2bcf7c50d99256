#include <benchmark/benchmark.h>

#include "metafold/ensemble_analysis.hpp"
#include "metafold/geometry.hpp"
#include "metafold/synthetic.hpp"

using namespace metafold;

namespace {

SyntheticEnsemble pair_of_modes(std::size_t length) {
  SynthesisSpec spec;
  spec.mode_sizes = {1, 1};
  spec.length = length;
  spec.seed = 1;
  return synthesize_ensemble(spec);
}

} // namespace

static void BM_Kabsch(benchmark::State& state) {
  auto s = pair_of_modes(static_cast<std::size_t>(state.range(0)));
  auto a = s.ensemble[0].ca(), b = s.ensemble[1].ca();
  for (auto _ : state)
    benchmark::DoNotOptimize(kabsch_superpose(a, b));
}
BENCHMARK(BM_Kabsch)->Arg(60)->Arg(300);

static void BM_TmScoreCrossMode(benchmark::State& state) {
  auto s = pair_of_modes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(tmscore(s.ensemble[0], s.ensemble[1]));
}
BENCHMARK(BM_TmScoreCrossMode)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMicrosecond);

static void BM_ClusterEnsemble(benchmark::State& state) {
  SynthesisSpec spec;
  spec.mode_sizes = {static_cast<std::size_t>(state.range(0)), 10};
  spec.length = 60;
  spec.seed = 2;
  auto s = synthesize_ensemble(spec);
  std::vector<std::size_t> kept(s.ensemble.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    kept[i] = i;
  for (auto _ : state)
    benchmark::DoNotOptimize(cluster_ensemble(s.ensemble, kept, VariableRegion{1, 60, 0.0}));
}
BENCHMARK(BM_ClusterEnsemble)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
