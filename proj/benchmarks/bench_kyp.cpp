#include "kyp/certify.hpp"
#include "kyp/frequency.hpp"
#include "kyp/nonstationary.hpp"
#include "kyp/storage.hpp"
#include "support/random_systems.hpp"

#include <benchmark/benchmark.h>

using namespace kyp;

namespace {

StateSpaceSystem fixture(int n) {
  testgen::SystemGenerator gen(7);
  testgen::SystemSpec spec;
  spec.nMin = spec.nMax = n;
  spec.mMax = spec.pMax = 2;
  return gen.system(spec, 0.9);
}

void BM_DichotomySplit(benchmark::State& state) {
  StateSpaceSystem sys = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dichotomy_split(sys));
}
BENCHMARK(BM_DichotomySplit)->Arg(2)->Arg(6)->Arg(12);

void BM_HinfNorm(benchmark::State& state) {
  StateSpaceSystem sys = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(sys));
}
BENCHMARK(BM_HinfNorm)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void storage_route(benchmark::State& state, StorageMethod method) {
  DichotomousDecomposition dec = dichotomy_split(fixture(4));
  StorageOptions opt;
  opt.N = static_cast<int>(state.range(0));
  opt.method = method;
  for (auto _ : state) benchmark::DoNotOptimize(compute_Ha(dec, opt));
}

void BM_StorageConstrained(benchmark::State& state) { storage_route(state, StorageMethod::Constrained); }
void BM_StorageExplicit(benchmark::State& state) { storage_route(state, StorageMethod::Explicit); }
BENCHMARK(BM_StorageConstrained)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StorageExplicit)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CertifyStandard(benchmark::State& state) {
  StateSpaceSystem sys = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(certify_standard(sys));
}
BENCHMARK(BM_CertifyStandard)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_CertifyStrict(benchmark::State& state) {
  StateSpaceSystem sys = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(certify_strict(sys));
}
BENCHMARK(BM_CertifyStrict)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SolveTvKyp(benchmark::State& state) {
  PeriodicSystem ps = PeriodicSystem::constant(fixture(2), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_tv_kyp(ps));
}
BENCHMARK(BM_SolveTvKyp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
