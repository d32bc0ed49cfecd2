#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "nlphase/types.hpp"

namespace nlphase {

/// Nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (n >= 1). Rules are computed once and cached.
const GaussRule& gauss_legendre(int n);

/// The 7-point Gauss / 15-point Kronrod pair on [-1, 1]. `gauss_weights` is aligned with the
/// odd-indexed Kronrod nodes (the embedded Gauss points).
struct KronrodPair {
  std::array<double, 15> nodes;
  std::array<double, 15> kronrod_weights;
  std::array<double, 15> gauss_weights;  // zero on non-Gauss nodes
};
const KronrodPair& gauss_kronrod_15();

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive G7-K15 on [a, b]. Throws QuadratureError when the integrand is non-finite
/// at a node; returns the best estimate (with its error) if max_intervals is reached.
Estimate integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                            int max_intervals = 2000);

// ---------------------------------------------------------------------------------------------
// Quadrature specifications

/// Composite tensor Gauss-Legendre: `order` nodes per panel, `panels` panels per dimension.
/// Consumers that need a target accuracy double the panel count until the estimate (difference
/// against the 3/4-order rule on the same panels) falls below `tol`, up to `max_panels`.
struct TensorGauss {
  int order = 32;
  int panels = 1;
  double tol = 1e-12;
  int max_panels = 512;
};

struct MonteCarlo {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

/// Digit enumeration for self-similar measures. Cylinders are enumerated to the deepest level
/// whose node count stays within `max_nodes`; each cylinder carries one node per digit (the
/// periodic points of the cyclic digit shifts). `depth` bounds the level. The error estimate is
/// the difference to the rule one level shallower.
struct DigitScheme {
  int depth = 30;
  std::size_t max_nodes = std::size_t{1} << 16;
};

/// Globally adaptive tensor G7-K15 cubature over parameter cells of the measure.
struct AdaptiveScheme {
  double abs_tol = 1e-8;
  int max_subdivisions = 4000;
};

using QuadratureSpec = std::variant<TensorGauss, MonteCarlo, DigitScheme, AdaptiveScheme>;

void validate(const QuadratureSpec& spec);
std::string scheme_name(const QuadratureSpec& spec);

/// Nodes with weights. Weights of a rule for measure mu sum to mu's total mass.
struct QuadratureRule {
  PointSet nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double total_weight() const;
};

enum class ErrorModel {
  RuleDifference,  // |fine - coarse|
  StandardError,   // Monte-Carlo: one standard error of the sample mean, scaled by mass
};

/// A measure discretized by a scheme: the rule used for values, plus a companion rule for the
/// error estimate (a lower order, a shallower digit level, or nothing for Monte-Carlo).
struct Discretization {
  QuadratureRule fine;
  QuadratureRule coarse;
  ErrorModel model = ErrorModel::RuleDifference;
  double extra_error = 0.0;  // truncation term added to every estimate
};

}  // namespace nlphase
