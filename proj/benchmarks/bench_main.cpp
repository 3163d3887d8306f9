#include <benchmark/benchmark.h>

#include "polydelay/experiment.hpp"
#include "polydelay/models.hpp"
#include "polydelay/quadrature.hpp"
#include "polydelay/transform.hpp"

namespace {

void BM_GaussJacobiRule(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto rule = polydelay::gauss_jacobi(m, 2, 2, 30.0, 150.0);
    benchmark::DoNotOptimize(rule.nodes.data());
  }
}
BENCHMARK(BM_GaussJacobiRule)->RangeMultiplier(2)->Range(1, 64);

void BM_EquivalentSystemCaseI(benchmark::State& state) {
  const auto sys = polydelay::scale_system(polydelay::sir::equivalent(polydelay::sir::reference_parameters(30.0, 150.0)));
  polydelay::SolverOptions opts;
  opts.h_max = 1e-3;
  for (auto _ : state) {
    auto traj = polydelay::solve(sys.assembled, 1000.0 / sys.time_scale, opts);
    benchmark::DoNotOptimize(traj.back_time());
    state.counters["steps"] = static_cast<double>(traj.steps_taken);
  }
}
BENCHMARK(BM_EquivalentSystemCaseI)->Unit(benchmark::kMillisecond);

void BM_QuadratureSystemCaseI(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto base =
      polydelay::scale_distributed(polydelay::sir::distributed(polydelay::sir::reference_parameters(30.0, 150.0)));
  const auto dde =
      polydelay::build_quadrature_dde(base, polydelay::gauss_jacobi(m, 2, 2, base.weight.lower(), base.weight.upper()));
  polydelay::SolverOptions opts;
  opts.h_max = 1e-3;
  for (auto _ : state) {
    auto traj = polydelay::solve(dde, 1000.0 / 150.0, opts);
    benchmark::DoNotOptimize(traj.back_time());
  }
}
BENCHMARK(BM_QuadratureSystemCaseI)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
