#include <benchmark/benchmark.h>

#include "fk/hetero.hpp"
#include "fk/mpp.hpp"
#include "fk/periodic.hpp"
#include "fk/verify.hpp"
#include "fk_cli/pipelines.hpp"

namespace {

fk::GapPair unit_gap() {
  return fk::require_gap_pair(fk::classical_fk(), fk::Periods{1, 1}, 8, 1, fk::FlowParams{});
}

void BM_LandscapeGradient(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fk::Periods p{side, side};
  const fk::TorusField zero(p, 0.0);
  const auto land = fk::torus_landscape(fk::classical_fk(), zero);
  std::vector<double> x(zero.size()), g(zero.size());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.01 * static_cast<double>(k % 37);
  for (auto _ : state) benchmark::DoNotOptimize(land.energy_and_gradient(x, g));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(x.size()));
}
BENCHMARK(BM_LandscapeGradient)->Arg(4)->Arg(16)->Arg(64);

// The convenience wrapper used for residual reports.
void BM_TorusGradient(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const fk::Periods p{side, side};
  auto s = fk::classical_fk();
  fk::TorusField u(p, 0.0), zero(p, 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) u.values[k] = 0.01 * static_cast<double>(k % 37);
  for (auto _ : state) benchmark::DoNotOptimize(fk::gradient(*s, u, zero));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(u.size()));
}
BENCHMARK(BM_TorusGradient)->Arg(16);

void BM_MinimizePeriodic(benchmark::State& state) {
  const fk::Periods p{static_cast<int>(state.range(0)), 2};
  auto s = fk::classical_fk();
  const auto seeds = fk::constant_seeds(p, 16);
  for (auto _ : state) benchmark::DoNotOptimize(fk::minimize_periodic(s, p, seeds, fk::FlowParams{}).c0p);
}
BENCHMARK(BM_MinimizePeriodic)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_MountainPass(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto mode = state.range(1) ? fk::MinimaxMode::kHeatFlow : fk::MinimaxMode::kNodeFlow;
  auto s = fk::classical_fk();
  const fk::GapPair g = unit_gap().extended(fk::Periods{k, 1});
  const auto path = fk::build_initial_path(fk::PathKind::kChi, fk::default_node_count(g.v0.periods), k, g);
  for (auto _ : state) benchmark::DoNotOptimize(fk::mountain_pass(s, g, path, fk::MinimaxParams{}, mode).value);
}
BENCHMARK(BM_MountainPass)->Args({2, 0})->Args({4, 0})->Args({2, 1})->Unit(benchmark::kMillisecond);

void BM_Landscape(benchmark::State& state) {
  auto s = fk::classical_fk();
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(fk::cli::emit_landscape(s, fk::Periods{2, 1}, grid, "", 1).max_value);
}
BENCHMARK(BM_Landscape)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_BottleneckOracle(benchmark::State& state) {
  auto s = fk::classical_fk();
  const auto f = fk::reduced_landscape(s, unit_gap().extended(fk::Periods{2, 1}));
  const auto grid = fk::OracleGrid2D::sample(static_cast<int>(state.range(0)), f);
  for (auto _ : state) benchmark::DoNotOptimize(fk::bottleneck_minimax_2d(grid));
}
BENCHMARK(BM_BottleneckOracle)->Arg(201)->Arg(1001)->Unit(benchmark::kMillisecond);

void BM_MinimizeHetero(benchmark::State& state) {
  auto s = fk::make_potential(fk::PotentialDescriptor{.name = "pinned-fk"});
  const fk::GapPair gap0 = unit_gap();
  for (auto _ : state)
    benchmark::DoNotOptimize(fk::minimize_hetero(s, fk::TransversePeriods{1}, gap0, fk::FlowParams{}).c1q);
}
BENCHMARK(BM_MinimizeHetero)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
