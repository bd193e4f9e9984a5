#include <benchmark/benchmark.h>

#include "invp/estimate.hpp"
#include "invp/loc_scale.hpp"
#include "invp/normality.hpp"
#include "invp/sampler.hpp"

namespace {

using namespace invp;

MonteCarloConfig config(std::size_t n_sim) {
  MonteCarloConfig c;
  c.n_sim = n_sim;
  c.seed = 1;
  c.workers = 1;
  return c;
}

void BM_DrawDirections(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(draw_directions(n, config(50000)));
  state.SetItemsProcessed(state.iterations() * 50000);
}
BENCHMARK(BM_DrawDirections)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_WeightedKde(benchmark::State& state) {
  const NormalStatistic stat = state.range(0) == 1 ? NormalStatistic::jb : NormalStatistic::t3t4;
  const WeightedDraws d = simulate_statistic(stat, 20, config(200000));
  const auto h = bandwidth_select(d);
  const Grid g = evaluation_grid(d, h, 512);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_kde(d, h, g));
}
BENCHMARK(BM_WeightedKde)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_FstarU(benchmark::State& state) {
  const LocScaleModel model = state.range(0) == 0 ? LocScaleModel::normal() : LocScaleModel::laplace();
  const AncillaryU u = ancillary_u(Sample({0.3, -1.2, 0.8, 2.1, -0.4, 0.0, 1.1, -2.3, 0.6}));
  for (auto _ : state) benchmark::DoNotOptimize(fstar_u(u, model));
}
BENCHMARK(BM_FstarU)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CheckNormal(benchmark::State& state) {
  const Sample x({3.1, 1.7, 4.4, 2.9, 5.2, 0.8, 3.6, 2.2, 3.9, 2.5, 4.8, 1.1, 3.3, 2.7, 3.0, 2.0, 3.4, 4.1, 1.9, 2.8});
  for (auto _ : state) benchmark::DoNotOptimize(check_normal({x, NormalStatistic::jb, config(200000)}));
}
BENCHMARK(BM_CheckNormal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
