#include <benchmark/benchmark.h>

#include "obliq/particles.hpp"
#include "obliq/skorokhod.hpp"
#include "obliq/suites.hpp"

using namespace obliq;

namespace {

void BM_SolveRegular(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto segments = static_cast<std::size_t>(state.range(1));
  Rng rng(3);
  const ReflectionMatrix r = random_reflection_matrix(rng, d);
  const RegularPath x = random_regular_path(rng, d, segments);
  for (auto _ : state) benchmark::DoNotOptimize(solve_regular(r, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(segments));
}
BENCHMARK(BM_SolveRegular)->ArgsProduct({{2, 5}, {10, 100, 1000}});

void BM_GridOracle(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const ReflectionMatrix r = random_reflection_matrix(rng, 3);
  const SampledPath x = random_regular_path(rng, 3, 50).sample(uniform_grid(1.0, steps));
  for (auto _ : state) benchmark::DoNotOptimize(solve_grid_oracle(r, x, 1e-8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_GridOracle)->Arg(1000)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_SimulateSrbm(benchmark::State& state) {
  const SolveMethod method = static_cast<SolveMethod>(state.range(0));
  Rng rng(5);
  const ReflectionMatrix r = random_reflection_matrix(rng, 3);
  BrownianSpec spec;
  spec.dim = 3;
  spec.drift = Vector::Constant(3, -0.5);
  spec.covariance = Matrix::Identity(3, 3);
  spec.steps = 1000;
  spec.seed = 9;
  SimulationOptions o;
  o.method = method;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_srbm(r, spec, Vector::Zero(3), o));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_SimulateSrbm)
    ->Arg(static_cast<int>(SolveMethod::continuous))
    ->Arg(static_cast<int>(SolveMethod::interpolated))
    ->Arg(static_cast<int>(SolveMethod::grid))
    ->Unit(benchmark::kMillisecond);

void BM_SimulateCbp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  const CbpSpec spec = random_cbp_spec(rng, n, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_cbp(spec));
}
BENCHMARK(BM_SimulateCbp)->Arg(2)->Arg(6)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
