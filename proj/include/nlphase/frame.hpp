#pragma once

#include <string>
#include <vector>

#include "nlphase/measure.hpp"
#include "nlphase/phase_map.hpp"
#include "nlphase/spectrum.hpp"

namespace nlphase {

enum class TestBasis { Dyadic, Legendre };

struct FrameOptions {
  TestBasis basis = TestBasis::Dyadic;
  /// Dyadic: number of cells (a d-th power of a power of two). Legendre: functions per axis
  /// are the d-th root of M.
  int M = 64;
  double orthonormality_tol = 1e-10;
};

struct FrameBoundsReport {
  double A = 0.0;
  double B = 0.0;
  std::size_t K = 0;  // spectrum size
  int M = 0;          // test functions actually used
  std::string test_family;
  std::vector<double> singular_values;
  double orthonormality_dev = 0.0;
  double quad_error = 0.0;
  std::string bias;
  QuadratureSpec quad;
};

/// Extreme squared singular values of T[lambda][j] = int psi_j e^{-2 pi i lambda . phi} dmu for
/// an orthonormal test family psi_1..psi_M.
FrameBoundsReport frame_bounds(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum,
                               const QuadratureSpec& quad, const FrameOptions& options = {});

}  // namespace nlphase
