#pragma once

#include <string>
#include <vector>

#include "nlphase/measure.hpp"
#include "nlphase/phase_map.hpp"
#include "nlphase/spectrum.hpp"

namespace nlphase {

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct GramOptions {
  /// Use the closed-form transform when phi_* mu is a recognizable self-similar measure.
  bool product_formula = true;
  int trunc = 40;
  std::size_t max_points = 4096;
};

/// G[a][b] = int e^{2 pi i (lambda_a - lambda_b) . phi(x)} dmu(x), one integral per distinct
/// difference.
struct GramReport {
  CMat entries;
  std::vector<double> entry_errors;  // per distinct difference
  double max_offdiag = 0.0;
  double diag_dev = 0.0;  // max |G_aa - total mass|
  double hermiticity = 0.0;
  double quad_error = 0.0;  // max error estimate over entries
  double total_mass = 0.0;
  std::size_t n = 0;
  std::size_t distinct_differences = 0;
  std::size_t cache_hits = 0;
  std::size_t nodes = 0;
  std::string method;  // "quadrature" or "product_formula"
  QuadratureSpec quad;
};

GramReport gram(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum, const QuadratureSpec& quad,
                const GramOptions& options = {});

/// A complex test function on the domain of mu.
struct TestFunction {
  std::string name;
  Integrand fn;
};

/// Smooth functions vanishing on the boundary of the support (for boxes, with u the coordinates
/// rescaled to [0,1]^d and b = prod u_k (1 - u_k)): 1, b, b^2 and b cos(2 pi u_d). On a disc
/// b = 1 - |x - c|^2 / R^2.
std::vector<TestFunction> default_battery(const Measure& mu);
/// Raw monomials of degree 1..4 in the rescaled first coordinate, the indicator of the lower
/// half of the support, and cos(2 pi u_1). These are not periodic on the support, so their
/// Parseval ratios converge slowly under truncation.
std::vector<TestFunction> extended_battery(const Measure& mu);

struct ParsevalRow {
  std::string name;
  double ratio = 0.0;
  double norm2 = 0.0;
};

struct VerifyOptions {
  double tol_orth = 1e-8;
  double tol_c = 0.02;
  GramOptions gram;
};

struct OnbReport {
  GramReport gram;
  bool orthogonal = false;
  std::vector<ParsevalRow> parseval;
  double coefficient_error = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  bool bessel_violation = false;
  std::string reason;
};

/// Orthogonality from the Gram matrix; completeness through Parseval ratios
/// sum |c_lambda|^2 / (G_lambda,lambda ||f||^2) of the test functions.
OnbReport verify_onb(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum, const QuadratureSpec& quad,
                     const std::vector<TestFunction>& tests, const VerifyOptions& options = {});

struct UnimodularReport {
  double max_deviation = 0.0;
  double quad_error = 0.0;
  std::size_t pairs = 0;
};

/// Compares G^{M phi}_{k,k'} with G^{phi}_{M^T k, M^T k'} over Z^d truncated at radius R.
UnimodularReport unimodular_conjugation_check(const Measure& mu, const PhaseMap& phi, const Mat& M, double radius,
                                              const QuadratureSpec& quad, const GramOptions& options = {});

}  // namespace nlphase
