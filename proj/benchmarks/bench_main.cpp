#include <benchmark/benchmark.h>

#include <random>

#include "glassland/complexity.hpp"
#include "glassland/dyson.hpp"
#include "glassland/hamiltonian.hpp"
#include "glassland/landscape.hpp"
#include "glassland/presets.hpp"

using namespace glassland;

namespace {

Vec point(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

void BM_EvaluateGradient(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const HamiltonianInstance h = sample(presets::cubic_pair(), N, 1);
  std::mt19937_64 rng(3);
  const Vec sigma = random_point(h.partition(), rng);
  Vec g;
  for (auto _ : state) benchmark::DoNotOptimize(h.evaluate(sigma, &g));
}
BENCHMARK(BM_EvaluateGradient)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_EvaluateValue(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const HamiltonianInstance h = sample(presets::cubic_pair(), N, 1);
  std::mt19937_64 rng(3);
  const Vec sigma = random_point(h.partition(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(h.evaluate(sigma, nullptr));
}
BENCHMARK(BM_EvaluateValue)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_LocalDataHessian(benchmark::State& state) {
  const HamiltonianInstance h = sample(presets::cubic_pair(), 100, 1);
  std::mt19937_64 rng(3);
  const Vec sigma = random_point(h.partition(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(local_data(h, sigma, true));
}
BENCHMARK(BM_LocalDataHessian)->Unit(benchmark::kMillisecond);

void BM_SolveDyson(benchmark::State& state) {
  const MixtureStats st = stats(presets::cubic_pair());
  const DysonSystem sys = asymptotic_system(st, point(2.0, 2.2));
  for (auto _ : state) benchmark::DoNotOptimize(solve_dyson(sys, cplx(-0.5, 1e-3)));
}
BENCHMARK(BM_SolveDyson)->Unit(benchmark::kMicrosecond);

void BM_SpectralMeasure(benchmark::State& state) {
  const MixtureStats st = stats(presets::skewed_pair());
  const DysonSystem sys = asymptotic_system(st, point(-1.5, 2.0));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_measure(sys));
}
BENCHMARK(BM_SpectralMeasure)->Unit(benchmark::kMillisecond);

void BM_PsiClosedForm(benchmark::State& state) {
  const MixtureStats st = stats(presets::skewed_pair());
  const Vec x = point(-1.5, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(psi(st, x));
}
BENCHMARK(BM_PsiClosedForm)->Unit(benchmark::kMicrosecond);

void BM_ComplexityPoint(benchmark::State& state) {
  const MixtureStats st = stats(presets::cubic_pair());
  const Vec x = point(2.0, 2.2);
  for (auto _ : state) benchmark::DoNotOptimize(F_point(st, x));
}
BENCHMARK(BM_ComplexityPoint)->Unit(benchmark::kMicrosecond);

void BM_NewtonRefine(benchmark::State& state) {
  const HamiltonianInstance h = sample(presets::cubic_pair(), 100, 2);
  const CriticalPointResult top = follow_critical_point(h, Signs{1, 1});
  std::mt19937_64 rng(5);
  const Vec start = retract(h.partition(), top.sigma + 0.05 * random_point(h.partition(), rng));
  for (auto _ : state) benchmark::DoNotOptimize(newton_refine(h, start));
}
BENCHMARK(BM_NewtonRefine)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
