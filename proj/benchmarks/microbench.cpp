// Micro-benchmarks of the per-iteration hot paths: classification of the
// 441-point grid, posterior prediction and restricted-likelihood fitting.

#include <vector>

#include <benchmark/benchmark.h>

#include "pals/gp.hpp"
#include "pals/pareto.hpp"
#include "pals/problems.hpp"
#include "pals/rng.hpp"

namespace {

// Store with `points` distinct grid points of g5, each evaluated 200 times.
pals::ObservationStore make_store(std::size_t points, std::uint64_t seed) {
  const pals::Problem& problem = pals::benchmark_problem("g5");
  pals::ObservationStore store(problem.grid().size(), problem.objectives());
  pals::Rng rng(seed);
  const std::size_t stride = problem.grid().size() / points;
  for (std::size_t i = 0; i < points; ++i) {
    const std::size_t index = (i * stride + 7) % problem.grid().size();
    store.fold(index, problem.sample(index, 200, rng));
  }
  return store;
}

void classify_grid(benchmark::State& state) {
  const std::size_t grid_size = pals::benchmark_grid().size();
  pals::Rng rng(3);
  std::normal_distribution<double> normal;
  std::vector<pals::UncertaintyRegion> regions;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const Eigen::Vector2d mu(normal(rng), normal(rng));
    const Eigen::Vector2d sd = Eigen::Vector2d::Constant(0.05 * state.range(0) / 10.0);
    regions.push_back(pals::rectangle_from_posterior(mu, sd, 0.45494));
  }
  const auto epsilon = pals::MarginVector::zeros(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pals::classify(regions, epsilon));
  }
}
BENCHMARK(classify_grid)->Arg(1)->Arg(10)->Arg(100);

void posterior_field(benchmark::State& state) {
  const auto store = make_store(static_cast<std::size_t>(state.range(0)), 5);
  const auto& grid = pals::benchmark_grid();
  std::vector<pals::KernelParams> params(2);
  for (auto& p : params) {
    p.variance = 0.1;
    p.lengthscales = Eigen::Vector2d::Constant(0.3);
    p.noise_variance = 0.01;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(pals::posterior(store, grid, params));
  }
}
BENCHMARK(posterior_field)->Arg(20)->Arg(50)->Arg(70);

void reml_fit(benchmark::State& state) {
  const auto store = make_store(static_cast<std::size_t>(state.range(0)), 9);
  const auto& grid = pals::benchmark_grid();
  const pals::FoldedData data = store.folded(0);
  const pals::KernelParams init = pals::default_kernel_params(data, grid);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pals::fit_reml(data, grid, init));
  }
}
BENCHMARK(reml_fit)->Arg(20)->Arg(50)->Arg(70)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
