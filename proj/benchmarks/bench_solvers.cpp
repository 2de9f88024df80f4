#include <benchmark/benchmark.h>

#include "demrep/frames.hpp"
#include "demrep/rng.hpp"
#include "demrep/solvers.hpp"

using namespace demrep;

// Fixed iteration counts so the numbers are per-iteration comparable.
static void BM_CramIterations(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto family = state.range(1) == 0 ? FrameFamily::SubsampledDft : FrameFamily::Gaussian;
  const auto frame = build_frame(family, n, n / 2, 1);
  Rng rng(8);
  const ComplexVector y = random_complex_normal(rng, n / 2);
  SolverConfig cfg;
  cfg.maxIters = 200;
  cfg.tolGap = cfg.tolPrimal = cfg.tolDual = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_cram(frame, y, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.maxIters);
}
BENCHMARK(BM_CramIterations)->ArgsProduct({{128, 512, 2048}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_CrampIterations(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto frame = build_frame(FrameFamily::SubsampledDft, n, n / 2, 1);
  Rng rng(9);
  const ComplexVector y = random_complex_normal(rng, n / 2);
  SolverConfig cfg;
  cfg.maxIters = 200;
  cfg.tolGap = cfg.tolPrimal = cfg.tolDual = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_cramp(frame, y, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.maxIters);
}
BENCHMARK(BM_CrampIterations)->Arg(128)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
