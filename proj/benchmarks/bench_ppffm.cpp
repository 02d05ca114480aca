// Microbenchmarks for the hot paths: per-family likelihood evaluation,
// renewal simulation, rescaling diagnostics, and a short Metropolis chain.
// All inputs are fixed-seed so numbers are comparable across runs.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ppffm/catalogue.hpp"
#include "ppffm/gof.hpp"
#include "ppffm/inference.hpp"
#include "ppffm/mcmc.hpp"
#include "ppffm/rate_models.hpp"
#include "ppffm/rng.hpp"
#include "ppffm/simulator.hpp"

namespace {

using namespace ppffm;

const PowerLawRate kRate{295.382, 1.321, 1.286};
const double kEnd = 1.321 - 200.0 / 1440.0;

EventCatalogue benchmark_catalogue() {
  SimulationSpec spec;
  spec.model = {Family::IG, 2.256};
  spec.rate = kRate;
  spec.start = 0.0;
  spec.end = kEnd;
  spec.seed = 1;
  return simulate(spec).catalogue;
}

ModelConfig model_for(Family f) {
  switch (f) {
    case Family::IP:
      return {Family::IP, 1.0};
    case Family::IG:
      return {Family::IG, 2.256};
    case Family::IW:
      return {Family::IW, 1.7};
    default:
      return {Family::IIG, 0.9};
  }
}

void BM_LogLikelihood(benchmark::State& state) {
  const ModelConfig model = model_for(static_cast<Family>(state.range(0)));
  const EventCatalogue cat = benchmark_catalogue();
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(model, kRate, cat));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(cat.size()));
}
BENCHMARK(BM_LogLikelihood)
    ->Arg(static_cast<int>(Family::IP))
    ->Arg(static_cast<int>(Family::IG))
    ->Arg(static_cast<int>(Family::IW))
    ->Arg(static_cast<int>(Family::IIG))
    ->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
  SimulationSpec spec;
  spec.model = {Family::IG, 2.256};
  spec.rate = kRate;
  spec.start = 0.0;
  spec.end = kEnd;
  spec.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(spec).catalogue.size());
  }
  state.SetLabel("~863 events");
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_RescaleAndKs(benchmark::State& state) {
  const ModelConfig model{Family::IG, 2.256};
  const EventCatalogue cat = benchmark_catalogue();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ks(rescale(model, kRate, cat)).d_stat);
  }
}
BENCHMARK(BM_RescaleAndKs)->Unit(benchmark::kMicrosecond);

void BM_ShortChain(benchmark::State& state) {
  const ModelConfig model{Family::IG, 2.256};
  const EventCatalogue cat = benchmark_catalogue();
  const PriorSpec prior;
  for (auto _ : state) {
    SamplerConfig cfg;
    cfg.iterations = 500;
    cfg.burn_in = 100;
    cfg.chains = 2;
    cfg.seed = 1;
    benchmark::DoNotOptimize(
        run_mcmc(model, prior, cat, cfg).total_draws());
  }
  state.SetLabel("500 iterations, 2 chains");
}
BENCHMARK(BM_ShortChain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
