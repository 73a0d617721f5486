#include <benchmark/benchmark.h>

#include <random>

#include "crossmatch/crossmatch.hpp"

using namespace crossmatch;

namespace {

PointCloud gaussian_cloud(std::size_t t, std::size_t d) {
  Rng rng(t * 31 + d);
  std::normal_distribution<double> z;
  std::vector<double> first((t / 2) * d), second((t - t / 2) * d);
  for (double& x : first) x = z(rng);
  for (double& x : second) x = z(rng);
  return PointCloud::from_samples(d, first, second);
}

void BM_SolveExact(benchmark::State& state) {
  const auto cloud = gaussian_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const auto cf = CostFunction::euclidean();
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(cloud, cf).total_cost());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveExact)->RangeMultiplier(2)->Range(100, 1600)->Unit(benchmark::kMillisecond);

void BM_SolveGreedy(benchmark::State& state) {
  const auto cloud = gaussian_cloud(static_cast<std::size_t>(state.range(0)), 2);
  const auto cf = CostFunction::euclidean();
  for (auto _ : state) benchmark::DoNotOptimize(solve_greedy(cloud, cf).total_cost());
}
BENCHMARK(BM_SolveGreedy)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);

void BM_BuildKnn(benchmark::State& state) {
  const auto cloud = gaussian_cloud(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_knn(cloud, 5).edge_count());
}
BENCHMARK(BM_BuildKnn)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_NullPmf(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(null_pmf(m, m).pmf.data());
}
BENCHMARK(BM_NullPmf)->RangeMultiplier(8)->Range(8, 4096);

void BM_PvaluePermutation(benchmark::State& state) {
  const auto cloud = gaussian_cloud(200, 2);
  const auto g = matching_to_graph(solve_exact(cloud, CostFunction::euclidean()));
  for (auto _ : state) benchmark::DoNotOptimize(pvalue_permutation(g, cloud, 1000, 1));
}
BENCHMARK(BM_PvaluePermutation)->Unit(benchmark::kMillisecond);

void BM_LimitQuadrature(benchmark::State& state) {
  const auto f = DensityModel::standard_gaussian(2);
  const auto g = DensityModel::gaussian({2.0, 0.0}, {1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(limit_integral(f, g, 0.5, 1.0).value);
}
BENCHMARK(BM_LimitQuadrature)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
