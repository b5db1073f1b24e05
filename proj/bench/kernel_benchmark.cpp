// Serial reference kernels against their OpenMP counterparts, plus fit
// throughput on a synthetic dataset.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "topolow/embedding.hpp"
#include "topolow/kernels.hpp"
#include "topolow/synthgen.hpp"

namespace {

using namespace topolow;

DenseMatrix random_coords(std::size_t m, std::size_t dim) {
  Rng rng(42);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  DenseMatrix x(m, dim);
  for (double& v : x.data()) v = u(rng);
  return x;
}

std::vector<kernels::ResidualTerm> all_terms(std::size_t m) {
  std::vector<kernels::ResidualTerm> terms;
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < m; ++j)
      if (i != j) terms.push_back({i, j, 1.0});
  return terms;
}

template <void (*Kernel)(const DenseMatrix&, DenseMatrix&)>
void BM_PairwiseDistances(benchmark::State& state) {
  const auto x = random_coords(static_cast<std::size_t>(state.range(0)), 5);
  DenseMatrix out;
  for (auto _ : state) {
    Kernel(x, out);
    benchmark::DoNotOptimize(out.data().data());
  }
}
BENCHMARK(BM_PairwiseDistances<kernels::serial::pairwise_distances>)->Name("pairwise/serial")->Arg(100)->Arg(500);
BENCHMARK(BM_PairwiseDistances<kernels::parallel::pairwise_distances>)->Name("pairwise/parallel")->Arg(100)->Arg(500);

template <double (*Kernel)(const DenseMatrix&, std::span<const kernels::ResidualTerm>)>
void BM_ResidualSum(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto x = random_coords(m, 5);
  const auto terms = all_terms(m);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, terms));
}
BENCHMARK(BM_ResidualSum<kernels::serial::abs_residual_sum>)->Name("residual/serial")->Arg(100)->Arg(500);
BENCHMARK(BM_ResidualSum<kernels::parallel::abs_residual_sum>)->Name("residual/parallel")->Arg(100)->Arg(500);

template <DenseMatrix (*Kernel)(const DenseMatrix&)>
void BM_DoubleCenter(benchmark::State& state) {
  const auto x = random_coords(static_cast<std::size_t>(state.range(0)), 5);
  DenseMatrix d;
  kernels::serial::pairwise_distances(x, d);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(d));
}
BENCHMARK(BM_DoubleCenter<kernels::serial::double_center_squared>)->Name("center/serial")->Arg(100)->Arg(500);
BENCHMARK(BM_DoubleCenter<kernels::parallel::double_center_squared>)->Name("center/parallel")->Arg(100)->Arg(500);

void BM_Fit(benchmark::State& state) {
  SyntheticSpec spec;
  spec.m = static_cast<std::size_t>(state.range(0));
  const auto data = simulate(spec);
  const Hyperparameters theta{3, 5.0, 0.01, 0.02};
  for (auto _ : state) benchmark::DoNotOptimize(fit(data.input, theta).iterations);
}
BENCHMARK(BM_Fit)->Name("fit")->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
