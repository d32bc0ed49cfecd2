#include <gtest/gtest.h>

#include <numeric>

#include "nlphase/kernels.hpp"
#include "nlphase/rng.hpp"

using namespace nlphase;

namespace {

PointSet random_points(int dim, std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  CounterRng rng(seed);
  PointSet p(dim, n);
  for (double& c : p.coords) c = rng.uniform(lo, hi);
  return p;
}

class ThreadGuard {
public:
  explicit ThreadGuard(int n) { kernels::set_num_threads(n); }
  ~ThreadGuard() { kernels::set_num_threads(0); }
};

}  // namespace

TEST(Rng, CounterStreamsAreReproducible) {
  CounterRng a(7);
  CounterRng b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  CounterRng c(7, 50);
  CounterRng d(7);
  for (int i = 0; i < 50; ++i) d();
  EXPECT_EQ(c(), d());
  EXPECT_NE(split_stream(1, 0)(), split_stream(1, 1)());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(ExpSums, MatchesDirectSum) {
  const PointSet y = random_points(2, 300, 1);
  const PointSet xi = random_points(2, 7, 2, -5.0, 5.0);
  std::vector<double> w(300);
  for (std::size_t n = 0; n < w.size(); ++n) w[n] = 1.0 / (1.0 + static_cast<double>(n));
  std::vector<Complex> out(7);
  kernels::serial::exp_sums(y, w, xi, -1.0, out);
  for (std::size_t k = 0; k < 7; ++k) {
    Complex ref{};
    for (std::size_t n = 0; n < 300; ++n)
      ref += w[n] * std::exp(Complex(0.0, -kTwoPi * (xi[k][0] * y[n][0] + xi[k][1] * y[n][1])));
    EXPECT_LE(std::abs(out[k] - ref), 1e-12);
  }
}

TEST(ExpSums, AccumulatesIntoOutput) {
  const PointSet y = random_points(1, 10, 3);
  const PointSet xi = random_points(1, 2, 4);
  std::vector<double> w(10, 0.1);
  std::vector<Complex> out(2, Complex(1.0, 2.0));
  std::vector<Complex> fresh(2);
  kernels::serial::exp_sums(y, w, xi, 1.0, out);
  kernels::serial::exp_sums(y, w, xi, 1.0, fresh);
  EXPECT_EQ(out[0], fresh[0] + Complex(1.0, 2.0));
}

TEST(SerialVsOmp, BitwiseIdenticalAcrossThreadCounts) {
  const PointSet y = random_points(2, 5000, 11);
  const PointSet xi = random_points(2, 33, 12, -8.0, 8.0);
  std::vector<double> w(5000, 1.0 / 5000.0);
  std::vector<Complex> v(5000 * 3);
  CounterRng rng(13);
  for (Complex& c : v) c = {rng.uniform(), rng.uniform()};

  std::vector<Complex> ref(33);
  kernels::serial::exp_sums(y, w, xi, 1.0, ref);
  std::vector<Complex> ref_t(33 * 3);
  kernels::serial::weighted_transform(y, w, v, 3, xi, -1.0, ref_t);
  const PhaseMap phi = PhaseMap::unipotent(2, std::vector<Expression>{Expression::parse("sin(2*pi*x2)")});
  const PointSet ref_m = kernels::serial::map_points(phi, y);
  const auto ref_h = kernels::serial::histogram(y, 8);

  for (int threads : {1, 2, 3, 8}) {
    ThreadGuard guard(threads);
    std::vector<Complex> out(33);
    kernels::omp::exp_sums(y, w, xi, 1.0, out);
    EXPECT_EQ(out, ref) << threads;
    std::vector<Complex> out_t(33 * 3);
    kernels::omp::weighted_transform(y, w, v, 3, xi, -1.0, out_t);
    EXPECT_EQ(out_t, ref_t) << threads;
    EXPECT_EQ(kernels::omp::map_points(phi, y).coords, ref_m.coords) << threads;
    EXPECT_EQ(kernels::omp::histogram(y, 8), ref_h) << threads;
  }
}

TEST(MapPoints, DomainErrorsPropagateFromParallelRegion) {
  PointSet x = random_points(2, 2000, 21, -0.5, 0.5);
  x[1500][0] = 0.9;
  x[1500][1] = 0.9;
  const PhaseMap h = PhaseMap::holhos();
  EXPECT_THROW(kernels::serial::map_points(h, x), DomainError);
  ThreadGuard guard(4);
  EXPECT_THROW(kernels::omp::map_points(h, x), DomainError);
}

TEST(MapPoints, DimensionMismatchThrows) {
  EXPECT_THROW(kernels::omp::map_points(PhaseMap::holhos(), random_points(1, 10, 1)), DomainError);
}

TEST(Histogram, CountsEveryPointOnce) {
  const PointSet u = random_points(2, 10000, 31);
  const auto h = kernels::omp::histogram(u, 4);
  ASSERT_EQ(h.size(), 16u);
  EXPECT_EQ(std::accumulate(h.begin(), h.end(), std::uint64_t{0}), 10000u);

  PointSet p(2, 2);
  p.coords = {0.1, 0.9, 0.6, 0.2};
  const auto g = kernels::serial::histogram(p, 2);
  // first coordinate slowest: (0,1) -> 1, (1,0) -> 2
  EXPECT_EQ(g, (std::vector<std::uint64_t>{0, 1, 1, 0}));
}
