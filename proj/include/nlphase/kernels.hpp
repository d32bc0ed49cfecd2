#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlphase/phase_map.hpp"
#include "nlphase/types.hpp"

// Hot loops of the library in two builds: a plain serial reference and an OpenMP version.
// Both produce bitwise-identical results (each output element is reduced in the same order),
// which the tests rely on.
namespace nlphase::kernels {

/// Thread count used by the OpenMP kernels (<= 0 restores the runtime default).
void set_num_threads(int n);
int num_threads();

#define NLPHASE_KERNEL_DECLS                                                                                    \
  /* out[k] += sum_n w[n] e^{2 pi i sign xi_k . y_n} */                                                       \
  void exp_sums(const PointSet& y, std::span<const double> w, const PointSet& xi, double sign,                 \
                std::span<Complex> out);                                                                      \
  /* out[k * J + j] += sum_n w[n] v[n * J + j] e^{2 pi i sign xi_k . y_n} */                                   \
  void weighted_transform(const PointSet& y, std::span<const double> w, std::span<const Complex> v,           \
                          std::size_t J, const PointSet& xi, double sign, std::span<Complex> out);            \
  /* y_n = phi(x_n) with domain checks */                                                                      \
  PointSet map_points(const PhaseMap& phi, const PointSet& x);                                                \
  /* counts of points of [0,1)^d in a bins^d grid (row-major, first coordinate slowest) */                   \
  std::vector<std::uint64_t> histogram(const PointSet& u, int bins);

namespace serial {
NLPHASE_KERNEL_DECLS
}  // namespace serial

namespace omp {
NLPHASE_KERNEL_DECLS
}  // namespace omp

#undef NLPHASE_KERNEL_DECLS

using omp::exp_sums;
using omp::histogram;
using omp::map_points;
using omp::weighted_transform;

}  // namespace nlphase::kernels
