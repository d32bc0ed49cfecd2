#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nlphase/gram.hpp"
#include "nlphase/phase_map.hpp"

namespace nlphase {

struct HistogramReport {
  double chi2 = 0.0;
  int dof = 0;
  double q99 = 0.0;
  double q9999 = 0.0;
  std::string verdict;  // UNIFORM, NONUNIFORM or INCONCLUSIVE
  std::size_t empty_bins = 0;
  std::size_t n = 0;
  int bins_per_axis = 0;
  std::vector<std::uint64_t> counts;
  /// Whether |det A| equals the box volume; otherwise only packing can be read from the test.
  bool covolume_matches = false;
};

/// Samples x uniformly in the half-open box, reduces u = A^{-1} phi(x) modulo Z^d, and tests
/// the histogram of u on a bins^d grid against uniformity with a chi-square statistic.
HistogramReport frac_histogram_test(const PhaseMap& phi, const Box& box, const Mat& A, std::size_t n, int bins_per_axis,
                                    std::uint64_t seed);
/// Rows of (u_1..u_d bin centers, count).
void write_histogram_csv(const HistogramReport& h, int dim, std::ostream& os);

struct OverlapReport {
  Vec k;
  double volume = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;
  bool valid = true;  // false when more than 1% of inversions failed
  std::string method;
};

/// Monte-Carlo estimate of m((phi(B) + k) cap phi(B)) = int_B |det J| 1[phi(x) + k in phi(B)] dx.
/// Membership is decided by inverting phi (Unipotent, Triangular2D, Affine and compositions with
/// affine maps); other maps use a 256^d occupancy grid dilated by one cell, which is approximate.
OverlapReport overlap_volume(const PhaseMap& phi, const Box& box, const Vec& k, std::size_t n, std::uint64_t seed);

struct TilingConfig {
  int radius = 2;  // lattice vectors A j with |j|_inf <= radius
  std::size_t overlap_samples = 20000;
  std::size_t histogram_samples = 200000;
  int bins_per_axis = 16;
  double volume_tol = 1e-3;
  std::uint64_t seed = 0;
};

struct TilingReport {
  Verdict packing = Verdict::Inconclusive;
  bool volume_match = false;
  double image_volume = 0.0;
  double image_volume_err = 0.0;
  double det_A = 0.0;
  std::string tiling;  // TILES, NOT-TILING or INCONCLUSIVE
  std::vector<OverlapReport> overlaps;
  HistogramReport histogram;
};

/// phi(B) tiles by A Z^d iff it packs (no translate overlaps with positive measure) and
/// m(phi(B)) = |det A|. The histogram test is run as corroboration.
TilingReport tiling_verdict(const PhaseMap& phi, const Box& box, const Mat& A, const TilingConfig& config);

}  // namespace nlphase
