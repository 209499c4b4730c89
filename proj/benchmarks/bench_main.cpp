#include <benchmark/benchmark.h>

#include <cmath>

#include "phnhvi/hypervolume.hpp"
#include "phnhvi/network.hpp"
#include "phnhvi/problems.hpp"
#include "phnhvi/rng.hpp"
#include "phnhvi/solver.hpp"

namespace {

using phnhvi::numerics::Matrix;
using phnhvi::numerics::Rng;

// Points on the positive part of the unit sphere, so every point is nondominated.
Matrix sphere_front(std::size_t n, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
      m(i, j) = std::abs(rng.normal());
      s += m(i, j) * m(i, j);
    }
    for (std::size_t j = 0; j < dims; ++j) m(i, j) /= std::sqrt(s);
  }
  return m;
}

void BM_Hypervolume(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dims = static_cast<std::size_t>(state.range(1));
  const auto pts = sphere_front(n, dims, 11);
  const std::vector<double> ref(dims, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(phnhvi::hypervolume::hv(pts, ref));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hypervolume)
    ->Args({16, 2})->Args({256, 2})->Args({4096, 2})
    ->Args({16, 3})->Args({231, 3})->Args({1024, 3})
    ->Args({8, 4})->Args({32, 4})->Args({64, 5});

void BM_HypervolumeGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dims = static_cast<std::size_t>(state.range(1));
  const auto pts = sphere_front(n, dims, 13);
  const std::vector<double> ref(dims, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(phnhvi::hypervolume::hv_gradient(pts, ref));
}
BENCHMARK(BM_HypervolumeGradient)->Args({4, 2})->Args({16, 2})->Args({8, 3})->Args({8, 4});

void BM_PhnHviStep(benchmark::State& state) {
  const std::string name = state.range(0) == 2 ? "p2" : "p4";
  const auto problem = phnhvi::problems::make_toy_problem(name);
  const std::size_t nobj = problem->objectives();
  Rng init(1);
  phnhvi::solver::TrainState ts(phnhvi::network::init_hypernet(problem->target_spec(), nobj, init),
                                1e-4);
  phnhvi::solver::TrainConfig cfg;
  cfg.rays = static_cast<std::size_t>(state.range(1));
  cfg.alpha = phnhvi::solver::default_alpha(cfg.solver, nobj);
  cfg.ref_point.assign(nobj, 2.0);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(phnhvi::solver::phn_hvi_step(ts, *problem, cfg, rng));
}
BENCHMARK(BM_PhnHviStep)->Args({2, 4})->Args({2, 16})->Args({3, 8});

}  // namespace

BENCHMARK_MAIN();
