#include <benchmark/benchmark.h>

#include "boundsci/coverage.hpp"
#include "boundsci/critical_value.hpp"
#include "boundsci/intervals.hpp"
#include "boundsci/mc_lab.hpp"
#include "boundsci/rng.hpp"

using namespace boundsci;

static void BM_BivariateRectProb(benchmark::State& state) {
  const Correlation rho(static_cast<double>(state.range(0)) / 100.0);
  double a = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bivariate_rect_prob(a, -0.3, rho));
    a = a > 2.0 ? -2.0 : a + 0.01;
  }
}
BENCHMARK(BM_BivariateRectProb)->Arg(0)->Arg(50)->Arg(95);

static void BM_EventProbability(benchmark::State& state) {
  EventParams p;
  p.delta = 1.3;
  p.lambda = 0.4;
  p.c = 1.7;
  p.rho = Correlation(static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(event_probability(p));
}
BENCHMARK(BM_EventProbability)->Arg(0)->Arg(50)->Arg(95);

static void BM_SolveCriticalValue(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_critical_value(Correlation(0.95), 0.05, false).c_hat);
  }
}
BENCHMARK(BM_SolveCriticalValue)->Unit(benchmark::kMillisecond)->Iterations(1);

static void BM_PhiloxBivariate(benchmark::State& state) {
  RngStream stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(stream.next_bivariate(Correlation(0.7)));
}
BENCHMARK(BM_PhiloxBivariate);

static void BM_CiTiClosedForm(benchmark::State& state) {
  InferenceProblem p;
  p.theta_U_hat = 0.8;
  const auto cv = ti_critical_values(p.rho_hat, p.alpha);
  for (auto _ : state) benchmark::DoNotOptimize(ci_ti_closed_form(p, cv));
}
BENCHMARK(BM_CiTiClosedForm);

static void BM_SmallExperiment(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.delta_grid = {-1.0, 0.0, 1.0, 2.0};
  cfg.replications = 10'000;
  cfg.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg).size());
}
BENCHMARK(BM_SmallExperiment)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
