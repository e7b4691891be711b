#include <benchmark/benchmark.h>

#include <cmath>

#include "radlab/radial_ode.hpp"
#include "radlab/separable.hpp"
#include "radlab/shooting.hpp"

using namespace radlab;

static void BM_IntegrateAubinTalenti(benchmark::State& st) {
  IntegratorConfig cfg;
  cfg.rel_tol = std::pow(10.0, -static_cast<double>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(integrate({3, 5.0, 1.5, 0.0}, 1.0, cfg));
}
BENCHMARK(BM_IntegrateAubinTalenti)->Arg(6)->Arg(9)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_IntegrateCrossing(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(integrate({3, 2.0, 4.0 / 3.0, 0.0}, 1.0));
}
BENCHMARK(BM_IntegrateCrossing)->Unit(benchmark::kMicrosecond);

static void BM_NonexistenceScan(benchmark::State& st) {
  const auto grid = make_grid(0.1, 10.0, 20, true);
  const auto jobs = static_cast<unsigned>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(nonexistence_scan({3, 3.0, 1.5, 10.0}, grid, {}, jobs));
}
BENCHMARK(BM_NonexistenceScan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_ConstantSolutions(benchmark::State& st) {
  const auto P = at_critical_q(3, 2.0, -2.0);
  for (auto _ : st) benchmark::DoNotOptimize(solve_constant_solutions(P));
}
BENCHMARK(BM_ConstantSolutions);

static void BM_Bifurcation(benchmark::State& st) {
  const auto P = at_critical_q(4, 5.0, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(bifurcation_point(2, P));
}
BENCHMARK(BM_Bifurcation);

BENCHMARK_MAIN();
