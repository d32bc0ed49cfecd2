// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "nlphase/kernels.hpp"
#include "nlphase/rng.hpp"

namespace {

using namespace nlphase;

PointSet random_points(int dim, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  PointSet p(dim, n);
  for (double& c : p.coords) c = rng.uniform();
  return p;
}

PointSet integer_frequencies(int dim, std::size_t n) {
  PointSet p(dim, n);
  for (std::size_t i = 0; i < p.coords.size(); ++i) p.coords[i] = static_cast<double>(static_cast<long>(i % 33) - 16);
  return p;
}

template <bool Parallel>
void BM_ExpSums(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointSet y = random_points(2, n, 1);
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const PointSet xi = integer_frequencies(2, 289);
  std::vector<Complex> out(xi.size());
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), Complex{});
    if constexpr (Parallel) kernels::omp::exp_sums(y, w, xi, 1.0, out);
    else kernels::serial::exp_sums(y, w, xi, 1.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * xi.size()));
}

template <bool Parallel>
void BM_MapPoints(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointSet x = random_points(2, n, 2);
  const PhaseMap phi = PhaseMap::unipotent(2, std::vector<Expression>{Expression::parse("sin(2*pi*x2)")});
  for (auto _ : state) {
    PointSet y = Parallel ? kernels::omp::map_points(phi, x) : kernels::serial::map_points(phi, x);
    benchmark::DoNotOptimize(y.coords.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool Parallel>
void BM_Histogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointSet u = random_points(2, n, 3);
  for (auto _ : state) {
    auto h = Parallel ? kernels::omp::histogram(u, 32) : kernels::serial::histogram(u, 32);
    benchmark::DoNotOptimize(h.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(BM_ExpSums<false>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_ExpSums<true>)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(BM_MapPoints<false>)->Arg(1 << 16);
BENCHMARK(BM_MapPoints<true>)->Arg(1 << 16);
BENCHMARK(BM_Histogram<false>)->Arg(1 << 20);
BENCHMARK(BM_Histogram<true>)->Arg(1 << 20);

BENCHMARK_MAIN();
