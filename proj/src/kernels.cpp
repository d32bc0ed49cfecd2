#include "nlphase/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include <omp.h>

namespace nlphase::kernels {

namespace {

int g_threads = 0;

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Complex exp_sum_one(const PointSet& y, std::span<const double> w, std::span<const double> xi, double sign) {
  double re = 0.0;
  double im = 0.0;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex e = unit_phase(sign * dot(xi, y[i]));
    re += w[i] * e.real();
    im += w[i] * e.imag();
  }
  return {re, im};
}

void transform_one(const PointSet& y, std::span<const double> w, std::span<const Complex> v, std::size_t J,
                   std::span<const double> xi, double sign, std::span<Complex> row) {
  std::vector<Complex> acc(J);
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex e = w[i] * unit_phase(sign * dot(xi, y[i]));
    const Complex* vi = v.data() + i * J;
    for (std::size_t j = 0; j < J; ++j) acc[j] += vi[j] * e;
  }
  for (std::size_t j = 0; j < J; ++j) row[j] += acc[j];
}

std::size_t bin_index(std::span<const double> u, int bins) {
  std::size_t idx = 0;
  for (double c : u) {
    long b = static_cast<long>(std::floor(c * bins));
    b = std::clamp<long>(b, 0, bins - 1);
    idx = idx * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b);
  }
  return idx;
}

std::size_t bin_count(int dim, int bins) {
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(bins);
  return total;
}

// Runs body(i) for i in [0, n) in parallel and rethrows the first exception after the loop.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t chunk = 1) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, chunk) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void set_num_threads(int n) { g_threads = n; }
int num_threads() { return thread_count(); }

namespace serial {

void exp_sums(const PointSet& y, std::span<const double> w, const PointSet& xi, double sign, std::span<Complex> out) {
  for (std::size_t k = 0; k < xi.size(); ++k) out[k] += exp_sum_one(y, w, xi[k], sign);
}

void weighted_transform(const PointSet& y, std::span<const double> w, std::span<const Complex> v, std::size_t J,
                        const PointSet& xi, double sign, std::span<Complex> out) {
  for (std::size_t k = 0; k < xi.size(); ++k) transform_one(y, w, v, J, xi[k], sign, out.subspan(k * J, J));
}

PointSet map_points(const PhaseMap& phi, const PointSet& x) {
  PointSet y(phi.out_dim(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) phi.eval(x[i], y[i]);
  return y;
}

std::vector<std::uint64_t> histogram(const PointSet& u, int bins) {
  std::vector<std::uint64_t> counts(bin_count(u.dim, bins), 0);
  for (std::size_t i = 0; i < u.size(); ++i) ++counts[bin_index(u[i], bins)];
  return counts;
}

}  // namespace serial

namespace omp {

void exp_sums(const PointSet& y, std::span<const double> w, const PointSet& xi, double sign, std::span<Complex> out) {
  parallel_for(xi.size(), [&](std::size_t k) { out[k] += exp_sum_one(y, w, xi[k], sign); });
}

void weighted_transform(const PointSet& y, std::span<const double> w, std::span<const Complex> v, std::size_t J,
                        const PointSet& xi, double sign, std::span<Complex> out) {
  parallel_for(xi.size(), [&](std::size_t k) { transform_one(y, w, v, J, xi[k], sign, out.subspan(k * J, J)); });
}

PointSet map_points(const PhaseMap& phi, const PointSet& x) {
  PointSet y(phi.out_dim(), x.size());
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (x.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(x.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) phi.eval(x[i], y[i]);
  });
  return y;
}

std::vector<std::uint64_t> histogram(const PointSet& u, int bins) {
  const std::size_t total = bin_count(u.dim, bins);
  const int threads = thread_count();
  std::vector<std::vector<std::uint64_t>> local(static_cast<std::size_t>(threads), std::vector<std::uint64_t>(total, 0));
  const long long n = static_cast<long long>(u.size());
#pragma omp parallel num_threads(threads)
  {
    auto& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (long long i = 0; i < n; ++i) ++mine[bin_index(u[static_cast<std::size_t>(i)], bins)];
  }
  std::vector<std::uint64_t> counts(total, 0);
  for (const auto& part : local)
    for (std::size_t b = 0; b < total; ++b) counts[b] += part[b];
  return counts;
}

}  // namespace omp

}  // namespace nlphase::kernels
