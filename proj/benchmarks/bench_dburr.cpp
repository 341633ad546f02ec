#include <benchmark/benchmark.h>

#include "dburr/closed_form.hpp"
#include "dburr/distribution.hpp"
#include "dburr/inference.hpp"
#include "dburr/mcmc.hpp"
#include "dburr/sampling.hpp"

namespace {

using namespace dburr;

Sample study_sample(std::size_t n) {
  SeededGenerator gen(derive_seed(12345, 0));
  return sample_dburr(gen, DBurrParams(2.0, 0.2), n);
}

void BM_Pmf(benchmark::State& state) {
  const DBurrParams p(2.0, 0.2);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dburr_pmf(x, p));
    x = x < 1000.0 ? x + 1.0 : 0.0;
  }
}
BENCHMARK(BM_Pmf);

void BM_LogLikelihood(benchmark::State& state) {
  const Sample s = study_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(s, 2.0, 0.2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LogLikelihood)->RangeMultiplier(10)->Range(25, 25000)->Complexity();

void BM_SampleFloor(benchmark::State& state) {
  SeededGenerator gen(1);
  const DBurrParams p(2.0, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_dburr(gen, p, 1000));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleFloor);

void BM_MleJoint(benchmark::State& state) {
  const Sample s = study_sample(1000);
  for (auto _ : state) benchmark::DoNotOptimize(mle_joint(s));
}
BENCHMARK(BM_MleJoint)->Unit(benchmark::kMillisecond);

void BM_ExactPosteriorMean(benchmark::State& state) {
  const SuffStats st = suff_stats(study_sample(static_cast<std::size_t>(state.range(0))), 2.0);
  const PriorSpec prior(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_posterior_mean(st, prior));
}
BENCHMARK(BM_ExactPosteriorMean)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MhJointChain(benchmark::State& state) {
  const Sample s = study_sample(25);
  MhConfig config;
  config.iters = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_joint_mh(s, config));
}
BENCHMARK(BM_MhJointChain)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
