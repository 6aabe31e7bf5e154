#include <benchmark/benchmark.h>

#include <vector>

#include "sinkflow/kernels.hpp"
#include "sinkflow/matrix.hpp"
#include "sinkflow/rng.hpp"

namespace {

using sinkflow::Matrix;
namespace serial = sinkflow::kernels::serial;
namespace parallel = sinkflow::kernels::parallel;

Matrix filled(std::size_t n, std::size_t m, std::uint64_t seed) {
  sinkflow::CounterRng rng(seed);
  Matrix a(n, m);
  for (double& v : a.data()) v = rng.uniform(0.1, 1.0);
  return a;
}

std::vector<double> filled(std::size_t n, std::uint64_t seed) {
  sinkflow::CounterRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(0.1, 1.0);
  return v;
}

template <auto Kernel>
void BM_mirror_rows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix base = filled(n, n, 1);
  const auto h = filled(n, 2), mu = filled(n, 3);
  Matrix out(n, n);
  for (auto _ : state) {
    Kernel(base, h, mu, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <auto Kernel>
void BM_logsumexp_cols(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = filled(n, n, 4);
  const auto shift = filled(n, 5);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, shift, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <auto Kernel>
void BM_col_sums(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = filled(n, n, 6);
  std::vector<double> out(n);
  for (auto _ : state) {
    Kernel(a, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <auto Kernel>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = filled(n, n, 7), b = filled(n, n, 8);
  Matrix out(n, n);
  for (auto _ : state) {
    Kernel(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

}  // namespace

BENCHMARK(BM_mirror_rows<serial::mirror_rows>)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(BM_mirror_rows<parallel::mirror_rows>)->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(BM_logsumexp_cols<serial::logsumexp_cols>)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(BM_logsumexp_cols<parallel::logsumexp_cols>)->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(BM_col_sums<serial::col_sums>)->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(BM_col_sums<parallel::col_sums>)->RangeMultiplier(4)->Range(64, 2048)->UseRealTime();
BENCHMARK(BM_matmul<serial::matmul>)->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(BM_matmul<parallel::matmul>)->RangeMultiplier(2)->Range(64, 256)->UseRealTime();

BENCHMARK_MAIN();
