#include <benchmark/benchmark.h>

#include "metafold/forest.hpp"

using namespace metafold;

namespace {

Dataset make_data(std::size_t n) {
  Rng rng(3);
  std::vector<double> v;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    int label = rng.uniform() < 0.2;
    y.push_back(label);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      v.push_back(rng.uniform() < 0.1 ? std::numeric_limits<double>::quiet_NaN()
                                      : rng.normal(0.5 * label, 1.0));
  }
  return Dataset(kFeatureCount, std::move(v), std::move(y));
}

} // namespace

static void BM_TrainForest(benchmark::State& state) {
  Dataset d = make_data(static_cast<std::size_t>(state.range(0)));
  Hyperparams hp;
  hp.n_trees = 100;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_forest(d, hp));
}
BENCHMARK(BM_TrainForest)->Arg(100)->Arg(386)->Unit(benchmark::kMillisecond);

static void BM_PredictForest(benchmark::State& state) {
  Dataset d = make_data(386);
  Hyperparams hp;
  ForestModel m = train_forest(d, hp);
  std::size_t r = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.predict_proba(d.row(r)));
    r = (r + 1) % d.rows();
  }
}
BENCHMARK(BM_PredictForest)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
