#include <benchmark/benchmark.h>

#include "fraglink/chain.hpp"
#include "fraglink/oracle.hpp"
#include "fraglink/pri.hpp"
#include "fraglink/reduction.hpp"
#include "fraglink/ssp.hpp"
#include "fraglink/testing/random_instances.hpp"

namespace {

using namespace fraglink;

testing::Instance make_instance(std::size_t nodes, std::size_t fragile, std::uint64_t seed = 42) {
  testing::Rng rng(seed);
  testing::InstanceOptions opt;
  opt.nodes = nodes;
  opt.fragile = fragile;
  opt.extra_fixed = nodes;
  return testing::random_instance(rng, opt);
}

// Args: nodes, fragile links (n/2 per node on average).
void BM_PageRankIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = make_instance(n, n * n / 4);
  std::size_t iterations = 0;
  for (auto _ : state) {
    const OptimizationResult r = pagerank_iteration(inst.graph, inst.v, DanglingRule::None);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.pagerank);
  }
  state.counters["d"] = static_cast<double>(inst.graph.fragile_count());
  state.counters["pri_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_PageRankIteration)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMillisecond);

void BM_MinPageRankIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = make_instance(n, n * n / 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_pagerank_iteration(inst.graph, inst.v, DanglingRule::None).pagerank);
  }
}
BENCHMARK(BM_MinPageRankIteration)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);

// Args: fragile links on a 10-node graph.
void BM_BruteForce(benchmark::State& state) {
  const auto inst = make_instance(10, static_cast<std::size_t>(state.range(0)));
  BruteForceOptions opt;
  opt.keep_table = false;
  opt.jobs = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force(inst.graph, inst.v, std::nullopt, DanglingRule::None, opt).best_pagerank);
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_BruteForce)->ArgsProduct({{4, 8, 12}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_DampedPolicyIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = make_instance(n, n * n / 4);
  const Personalization pers = Personalization::uniform(n, 0.15);
  std::size_t iterations = 0;
  for (auto _ : state) {
    const OptimizationResult r = optimize_pagerank_ssp(inst.graph, inst.v, DanglingRule::None, pers,
                                                       Objective::Maximize);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.pagerank);
  }
  state.counters["pi_iterations"] = static_cast<double>(iterations);
}
BENCHMARK(BM_DampedPolicyIteration)->RangeMultiplier(2)->Range(8, 32)->Unit(benchmark::kMillisecond);

void BM_ReduceMaxPagerank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = make_instance(n, n * n / 4);
  for (auto _ : state) {
    const ReducedSsp r = reduce_max_pagerank(inst.graph, inst.v);
    benchmark::DoNotOptimize(r.model.state_count());
  }
  state.counters["d"] = static_cast<double>(inst.graph.fragile_count());
}
BENCHMARK(BM_ReduceMaxPagerank)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);

void BM_PagerankDirect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = make_instance(n, 0);
  const StochasticMatrix p = transition_matrix(inst.graph);
  const Personalization pers = Personalization::uniform(n, 0.15);
  for (auto _ : state) benchmark::DoNotOptimize(pagerank_direct(p, pers)[0]);
}
BENCHMARK(BM_PagerankDirect)->RangeMultiplier(4)->Range(16, 256);

}  // namespace

BENCHMARK_MAIN();
