#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nlphase/types.hpp"

namespace nlphase {

struct LatticeGenerator {
  Mat A;
  double radius = 0.0;
};

struct Lambda4Generator {
  int level = 1;
};

struct ExplicitGenerator {};

using SpectrumGenerator = std::variant<LatticeGenerator, Lambda4Generator, ExplicitGenerator>;

/// Finite truncation of a frequency set.
struct SpectrumSet {
  PointSet points;
  SpectrumGenerator generator;

  std::size_t size() const { return points.size(); }
  int dim() const { return points.dim; }
  std::string describe() const;
};

/// Points of A Z^d with sup-norm <= radius, sorted lexicographically by integer coordinates.
SpectrumSet lattice(const Mat& A, double radius);
/// Generator of the dual lattice, A^{-T}.
Mat dual_lattice(const Mat& A);
/// { sum_{i<n} 4^i a_i : a_i in {0, 1} } in increasing order, 1 <= n <= 16.
SpectrumSet lambda4(int n);
/// An explicit list; points must be pairwise distinct.
SpectrumSet explicit_spectrum(PointSet points);
/// Places a spectrum into R^dim, coordinate k going to axis axes[k]; other axes are zero.
SpectrumSet embed(const SpectrumSet& s, int dim, const std::vector<int>& axes);

/// Number of points of the (untruncated) generated set in the half-open window [lo, hi).
/// Explicit sets are counted directly and must cover the window.
std::size_t count_in_window(const SpectrumSet& s, const Vec& lo, const Vec& hi);

struct DensityRow {
  double R = 0.0;
  double d_plus = 0.0;
  double d_minus = 0.0;
};

struct DensityReport {
  std::vector<DensityRow> rows;
  std::size_t centers = 0;
  std::string verdict;  // description of the trend across R
};

/// Sup/inf over window centers of #(Lambda cap Q_R(x)) / R^d, with half-open cubes
/// Q_R(x) = [x - R/2, x + R/2)^d. Centers: the origin plus `n_centers` uniform draws from
/// [-center_range, center_range]^d.
DensityReport beurling_density(const SpectrumSet& s, const std::vector<double>& radii, std::size_t n_centers,
                               double center_range, std::uint64_t seed);

}  // namespace nlphase
