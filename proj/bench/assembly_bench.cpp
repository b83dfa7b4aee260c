// Residual and Jacobian assembly: operator-level reference vs the fused
// kernel, serial vs OpenMP. Plus one full Gauss-Newton solve per grid size.

#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "mfgnet/harness.hpp"
#include "mfgnet/solver.hpp"

namespace {

using namespace mfgnet;

struct Fixture {
  Problem problem;
  std::vector<double> x;
};

Fixture make(int n) {
  auto cfg = preset_configs(PresetId::test1).front();
  cfg.nodes_per_edge = n;
  Fixture f{build_problem(cfg), {}};
  f.x = initial_guess(f.problem);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  for (auto& v : f.x) v += noise(rng);
  return f;
}

void BM_ResidualReference(benchmark::State& state) {
  const auto f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_residual_reference(f.problem, f.x));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.problem.num_equations()));
}

void BM_ResidualSerial(benchmark::State& state) {
  const auto f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_residual(f.problem, f.x, Execution::serial));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.problem.num_equations()));
}

void BM_ResidualParallel(benchmark::State& state) {
  const auto f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_residual(f.problem, f.x, Execution::parallel));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.problem.num_equations()));
}

void BM_JacobianSerial(benchmark::State& state) {
  const auto f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_jacobian(f.problem, f.x, Execution::serial));
}

void BM_JacobianParallel(benchmark::State& state) {
  const auto f = make(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_jacobian(f.problem, f.x, Execution::parallel));
}

void BM_Solve(benchmark::State& state) {
  auto cfg = preset_configs(PresetId::test1).front();
  cfg.nodes_per_edge = static_cast<int>(state.range(0));
  const auto problem = build_problem(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(gauss_newton(problem, cfg.solver));
}

}  // namespace

BENCHMARK(BM_ResidualReference)->Arg(250)->Arg(2000)->Arg(20000);
BENCHMARK(BM_ResidualSerial)->Arg(250)->Arg(2000)->Arg(20000);
BENCHMARK(BM_ResidualParallel)->Arg(250)->Arg(2000)->Arg(20000);
BENCHMARK(BM_JacobianSerial)->Arg(250)->Arg(2000)->Arg(20000);
BENCHMARK(BM_JacobianParallel)->Arg(250)->Arg(2000)->Arg(20000);
BENCHMARK(BM_Solve)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
