#include <benchmark/benchmark.h>

#include "ppipw/estimators.hpp"
#include "ppipw/harness.hpp"
#include "ppipw/privacy.hpp"
#include "ppipw/propensity.hpp"
#include "ppipw/synthgen.hpp"
#include "ppipw/theory.hpp"

using namespace ppipw;

namespace {

SynthResult make_data(Eigen::Index n, Eigen::Index d) {
  SynthConfig config;
  config.d = d;
  config.n_units = n;
  RngStream stream(1, derive_stream_id(0, "bench-data"));
  return generate(config, stream);
}

void bm_train(benchmark::State& state) {
  auto synth = make_data(state.range(0), 50);
  for (auto _ : state) {
    auto model = train(synth.data, 0.1);
    benchmark::DoNotOptimize(model.weights);
  }
}
BENCHMARK(bm_train)->Arg(500)->Arg(2500)->Unit(benchmark::kMillisecond);

void bm_ipw_ate_trimmed(benchmark::State& state) {
  auto synth = make_data(state.range(0), 50);
  auto model = train(synth.data, 0.1);
  auto scores = score_rows(model.weights, synth.data);
  for (auto _ : state) {
    auto est = ipw_ate_trimmed(synth.data, scores, 0.05);
    benchmark::DoNotOptimize(est.value);
  }
}
BENCHMARK(bm_ipw_ate_trimmed)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void bm_bias_g(benchmark::State& state) {
  auto synth = make_data(state.range(0), 50);
  auto model = train(synth.data, 0.1);
  PrivacyBudget budget(0.5, 1e-6);
  for (auto _ : state) {
    auto g = bias_g(synth.data, model, budget, 1000);
    benchmark::DoNotOptimize(g.g_value);
  }
}
BENCHMARK(bm_bias_g)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void bm_privatize_weights(benchmark::State& state) {
  auto synth = make_data(1000, 50);
  auto model = train(synth.data, 0.1);
  PrivacyBudget budget(0.5, 1e-6);
  RngStream stream(2, derive_stream_id(0, "bench-noise"));
  for (auto _ : state) {
    auto pm = privatize_weights(model, budget, stream);
    benchmark::DoNotOptimize(pm.noisy_weights);
  }
}
BENCHMARK(bm_privatize_weights)->Unit(benchmark::kMicrosecond);

void bm_run_trial(benchmark::State& state) {
  ExperimentConfig config;
  config.synth.d = 50;
  config.m_grid = {state.range(0)};
  config.n_estimate = 1000;
  auto ctx = prepare(config);
  long trial = 0;
  for (auto _ : state) {
    auto record = run_trial(ctx, 0.5, state.range(0), 0, trial++);
    benchmark::DoNotOptimize(record.tau_n_eps);
  }
}
BENCHMARK(bm_run_trial)->Arg(500)->Arg(2500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
