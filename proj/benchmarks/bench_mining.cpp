#include <benchmark/benchmark.h>

#include "bench_data.hpp"
#include "fairprobe/mining.hpp"

namespace {

void BM_FrequentRuleSets(benchmark::State& state) {
  const auto data = bench::loans(static_cast<std::size_t>(state.range(0)));
  fairprobe::MiningOptions options;
  options.theta = 0.05;
  options.rules.bins = static_cast<std::size_t>(state.range(1));
  std::size_t frequent = 0;
  for (auto _ : state) {
    frequent = fairprobe::frequent_rule_sets(data, options).frequent.size();
    benchmark::DoNotOptimize(frequent);
  }
  state.counters["frequent"] = static_cast<double>(frequent);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrequentRuleSets)->Args({4000, 5})->Args({4000, 10})->Args({40000, 10})->Unit(benchmark::kMillisecond);

void BM_Support(benchmark::State& state) {
  const auto data = bench::loans(static_cast<std::size_t>(state.range(0)));
  const auto groups = fairprobe::rule_groups(data.schema());
  const fairprobe::RuleSet rs({groups[0][0], groups[1][1], groups[2][3]});
  for (auto _ : state) {
    benchmark::DoNotOptimize(fairprobe::support(data, rs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Support)->Arg(4000)->Arg(40000);

} // namespace
