#include <benchmark/benchmark.h>

#include "demrep/prox.hpp"
#include "demrep/rng.hpp"

using namespace demrep;

static void BM_ProxInf(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  Rng rng(1);
  const ComplexVector z = random_complex_normal(rng, n);
  // tau near the l1 norm clamps most entries, small tau only a few.
  const double tau = state.range(1) == 0 ? 0.1 : z.cwiseAbs().sum() * 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(prox_inf(z, tau));
}
BENCHMARK(BM_ProxInf)->ArgsProduct({benchmark::CreateRange(64, 16384, 4), {0, 1}});

static void BM_ProxInfTilde(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  Rng rng(2);
  const ComplexVector z = random_complex_normal(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(prox_inf_tilde(z, 1.0));
}
BENCHMARK(BM_ProxInfTilde)->Range(64, 16384);

static void BM_ProjectL1Ball(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  Rng rng(3);
  const ComplexVector z = random_complex_normal(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(project_l1_ball(z, 1.0));
}
BENCHMARK(BM_ProjectL1Ball)->Range(64, 16384);
