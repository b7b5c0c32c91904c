#include <benchmark/benchmark.h>

#include "micromacro/fock.hpp"
#include "micromacro/phase_space.hpp"
#include "micromacro/pipeline.hpp"
#include "micromacro/tomography.hpp"

using namespace micromacro;

static void BM_SqueezeNumberState(benchmark::State& state) {
  const double r = state.range(0) / 100.0;
  const auto psi = FockAmplitudes::number_state(3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(apply_squeeze(psi, {r, +1}));
}
BENCHMARK(BM_SqueezeNumberState)->Arg(50)->Arg(150)->Arg(265)->Unit(benchmark::kMillisecond);

static void BM_RunFock(benchmark::State& state) {
  ExperimentConfig c;
  c.target_n = static_cast<double>(state.range(0));
  c.eta = 0.95;
  c.eta1 = c.eta2 = 0.9;
  c.engine = Engine::kFock;
  for (auto _ : state) benchmark::DoNotOptimize(run(c));
}
BENCHMARK(BM_RunFock)->Arg(1)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_RunPhaseSpace(benchmark::State& state) {
  ExperimentConfig c;
  c.target_n = static_cast<double>(state.range(0));
  c.eta = 0.95;
  c.eta1 = c.eta2 = 0.9;
  c.engine = Engine::kPhaseSpace;
  for (auto _ : state) benchmark::DoNotOptimize(run(c));
}
BENCHMARK(BM_RunPhaseSpace)->Arg(1)->Arg(100)->Arg(10000)->Unit(benchmark::kMicrosecond);

static void BM_SampleQuadratures(benchmark::State& state) {
  ExperimentConfig c;
  c.r = 1.0;
  c.eta = 0.95;
  const auto w = final_wigner(c);
  SamplingOptions o;
  o.n_samples = static_cast<std::size_t>(state.range(0));
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample(w, o));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleQuadratures)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

static void BM_Reconstruct(benchmark::State& state) {
  ExperimentConfig c;
  c.r = 1.0;
  c.eta = 0.95;
  SamplingOptions o;
  o.n_samples = static_cast<std::size_t>(state.range(0));
  o.seed = 1;
  const auto record = sample(final_wigner(c), o);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(record));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reconstruct)->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
