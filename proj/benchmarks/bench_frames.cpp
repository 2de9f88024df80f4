#include <benchmark/benchmark.h>

#include "demrep/frames.hpp"
#include "demrep/rng.hpp"

using namespace demrep;

static void BM_DftApplyAdjoint(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto frame = build_frame(FrameFamily::SubsampledDft, n, n / 4, 1);
  Rng rng(4);
  const ComplexVector x = random_complex_normal(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(frame.adjoint(frame.apply(x)));
}
BENCHMARK(BM_DftApplyAdjoint)->RangeMultiplier(2)->Range(128, 8192);

static void BM_DenseApplyAdjoint(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  const auto frame = build_frame(FrameFamily::Gaussian, n, n / 4, 1);
  Rng rng(5);
  const ComplexVector x = random_complex_normal(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(frame.adjoint(frame.apply(x)));
}
BENCHMARK(BM_DenseApplyAdjoint)->RangeMultiplier(2)->Range(128, 2048);

static void BM_ToneMapApply(benchmark::State& state) {
  std::vector<Index> reserved;
  for (Index k = 0; k < 20; ++k) reserved.push_back(1 + 40 * k);
  const auto frame = FrameOperator::oversampled_tone_map(2048, static_cast<int>(state.range(0)), reserved);
  Rng rng(6);
  const ComplexVector x = random_complex_normal(rng, frame.cols());
  for (auto _ : state) benchmark::DoNotOptimize(frame.apply(x));
}
BENCHMARK(BM_ToneMapApply)->Arg(1)->Arg(4);

static void BM_EquiangularBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_frame(FrameFamily::EquiangularParseval, 128, 64, 7, 50));
}
BENCHMARK(BM_EquiangularBuild)->Unit(benchmark::kMillisecond);
