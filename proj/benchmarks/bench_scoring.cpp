#include <benchmark/benchmark.h>

#include "bench_data.hpp"
#include "fairprobe/audit.hpp"
#include "fairprobe/mining.hpp"
#include "fairprobe/scorer.hpp"
#include "fairprobe/trainer.hpp"

namespace {

using namespace fairprobe;

void BM_GroupFairnessScore(benchmark::State& state) {
  const auto data = bench::loans(4000);
  MlpOracle oracle(initialize_mlp(data.schema(), Architecture{}, 1), data.schema());
  const auto groups = rule_groups(data.schema());
  const StructuredSampler sampler(data, RuleSet({groups[0][0], groups[1][1]}), {});
  ScorerConfig config;
  config.block_size = static_cast<std::size_t>(state.range(0));
  std::size_t pairs = 0;
  for (auto _ : state) {
    const auto r = group_fairness_score(oracle, sampler, "yes", config);
    pairs += r.samples;
    benchmark::DoNotOptimize(r);
  }
  state.counters["pairs/s"] = benchmark::Counter(static_cast<double>(pairs), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_GroupFairnessScore)->Arg(1)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_StructuredDraw(benchmark::State& state) {
  const auto data = bench::loans(4000);
  const auto groups = rule_groups(data.schema());
  const StructuredSampler sampler(data, RuleSet({groups[0][0], groups[2][2]}), {});
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.draw(Side::inside, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StructuredDraw);

} // namespace
