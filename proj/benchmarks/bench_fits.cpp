#include "ckqr/bandwidth.hpp"
#include "ckqr/design.hpp"
#include "ckqr/qr_exact.hpp"
#include "ckqr/qr_smooth.hpp"

#include <benchmark/benchmark.h>

using namespace ckqr;

namespace {

Dataset
data_for(benchmark::State& state, const char* design)
{
  return sample(DgpSpec::from_name(design, state.range(0)), 1);
}

void
BM_KernelValues(benchmark::State& state)
{
  const Kernel k = Kernel::gaussian(static_cast<int>(state.range(0)));
  double u = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.values(u));
    u = u > 3.0 ? -3.0 : u + 1e-3;
  }
}
BENCHMARK(BM_KernelValues)->Arg(2)->Arg(8);

void
BM_FitExact(benchmark::State& state)
{
  const Dataset data = data_for(state, "exponential");
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_exact(data, 0.5).beta);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitExact)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

void
BM_FitSmoothedRot(benchmark::State& state)
{
  const Dataset data = data_for(state, "exponential");
  const Kernel g2 = Kernel::gaussian(2);
  const double h = resolve_bandwidth(BandwidthRule::rot(), data, 0.5, g2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_smoothed(data, { g2, h, 0.5 }).beta);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitSmoothedRot)->RangeMultiplier(4)->Range(100, 6400)->Complexity();

void
BM_Process99(benchmark::State& state)
{
  const Dataset data = data_for(state, "qr41");
  std::vector<double> taus;
  for (int j = 1; j <= 99; ++j) {
    taus.push_back(j / 100.0);
  }
  const Kernel g2 = Kernel::gaussian(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_process(data, taus, g2, BandwidthRule::fixed_at(0.1)).betas);
  }
}
BENCHMARK(BM_Process99)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void
BM_Bootstrap(benchmark::State& state)
{
  const Dataset data = data_for(state, "heteroskedastic");
  for (auto _ : state) {
    benchmark::DoNotOptimize(pairs_bootstrap_se(data, 0.5, 200, 3));
  }
}
BENCHMARK(BM_Bootstrap)->Arg(250)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
