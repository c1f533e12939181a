#include <benchmark/benchmark.h>

#include <indiff/hazard.hpp>
#include <indiff/market.hpp>
#include <indiff/pricing.hpp>
#include <indiff/regime_chain.hpp>
#include <indiff/strategy.hpp>
#include <indiff/value_odes.hpp>

using namespace indiff;

namespace {

MarketParams reference_market() {
  return MarketParams::constant(0.05, {{0.15, 0.15, 0.15, 0.3}, {0.12, 0.25, 0.1, 0.35}}, 0.3, 0.4);
}

void BM_PiStar(benchmark::State& state) {
  const auto m = reference_market();
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_pi_star(StrategyQuery{m, t, 1, 1.0, 10.0}).pi_star);
    t = t < 9.9 ? t + 0.01 : 0.0;
  }
}
BENCHMARK(BM_PiStar);

void BM_Varphi(benchmark::State& state) {
  const auto gen = validate_generator({{-0.2, 0.2}, {0.1, -0.1}});
  const auto m = reference_market();
  for (auto _ : state) benchmark::DoNotOptimize(solve_varphi(gen, m, 1.0, 10.0).phi(0.0, 0));
}
BENCHMARK(BM_Varphi)->Unit(benchmark::kMillisecond);

void BM_PhiPde(benchmark::State& state) {
  const auto h = gompertz_as_general(GompertzParams{});
  const auto nodes = static_cast<std::size_t>(state.range(0));
  const PdeGrid grid = pde_grid_for(0.01, 0.01, 10.0, 1000, nodes);
  for (auto _ : state) benchmark::DoNotOptimize(solve_phi_pde(h, PolicySpec{}, grid).node(0, nodes / 2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PhiPde)->Arg(501)->Arg(2001)->Arg(8001)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_SurvivalMc(benchmark::State& state) {
  const auto h = gompertz_as_general(GompertzParams{});
  McOptions opts;
  opts.paths = static_cast<std::size_t>(state.range(0));
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(survival_probability(h, 0.0, 0.01, 10.0, opts).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SurvivalMc)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
