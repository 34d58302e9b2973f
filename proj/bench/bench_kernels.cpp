// Serial reference against the OpenMP kernel for each parallel hot spot.

#include <benchmark/benchmark.h>

#include "holoq/berry.hpp"
#include "holoq/noise.hpp"

using namespace holoq;

namespace {

const CircuitParams kParams = CircuitParams::from_eta(2.0 * kPi * 40.0, 0.1, 0.1);

void BM_SampleGroundStates(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const ChargeBasis basis(100);
  const auto points = standard_loop().sample();
  for (auto _ : state) {
    auto r = parallel ? sample_ground_states(kParams, points, basis, Parity::odd)
                      : sample_ground_states_serial(kParams, points, basis, Parity::odd);
    benchmark::DoNotOptimize(r.energies.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(points.size()));
}
BENCHMARK(BM_SampleGroundStates)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CurvatureMap(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const ChargeBasis basis(100);
  const GridSpec grid = zoom_curvature_grid(kParams);
  for (auto _ : state) {
    auto g = parallel ? curvature_map(kParams, grid, basis) : curvature_map_serial(kParams, grid, basis);
    benchmark::DoNotOptimize(g.difference.data());
  }
}
BENCHMARK(BM_CurvatureMap)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const ChargeBasis basis(12);
  MonteCarloOptions mc;
  mc.n_samples = 4;
  const NoiseSpec noise{6.5e-4, 1.0 / 150.0, 5.0};
  for (auto _ : state) {
    auto r = parallel ? monte_carlo_infidelity(kParams, 15.0, noise, basis, mc)
                      : monte_carlo_infidelity_serial(kParams, 15.0, noise, basis, mc);
    benchmark::DoNotOptimize(r.gamma_sq_mean);
  }
}
BENCHMARK(BM_MonteCarlo)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
