#include <benchmark/benchmark.h>

#include "bench_data.hpp"
#include "fairprobe/mlp.hpp"
#include "fairprobe/trainer.hpp"

namespace {

void BM_MlpPredictBatch(benchmark::State& state) {
  const auto data = bench::loans(4000);
  fairprobe::MlpOracle oracle(fairprobe::initialize_mlp(data.schema(), fairprobe::Architecture{}, 1), data.schema());
  std::vector<fairprobe::FeatureVector> xs;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    xs.push_back(data.row(i % data.size()).features);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle.predict_batch(xs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpPredictBatch)->Arg(256)->Arg(4096);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = bench::loans(static_cast<std::size_t>(state.range(0)));
  const auto start = fairprobe::initialize_mlp(data.schema(), fairprobe::Architecture{}, 1);
  fairprobe::TrainerConfig config;
  config.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fairprobe::fit_mlp(start, data, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(4000)->Unit(benchmark::kMillisecond);

} // namespace
