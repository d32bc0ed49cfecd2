#include "nlphase/reconstruct.hpp"

#include <cmath>

#include "nlphase/kernels.hpp"

namespace nlphase {

namespace {

double requested_tolerance(const QuadratureSpec& quad) {
  if (const auto* t = std::get_if<TensorGauss>(&quad)) return t->tol;
  if (const auto* a = std::get_if<AdaptiveScheme>(&quad)) return a->abs_tol;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

CoefficientReport coefficients(const Integrand& f, const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum,
                               const QuadratureSpec& quad) {
  if (phi.in_dim() != mu.dim() || phi.out_dim() != spectrum.dim()) throw DomainError("coefficients: dimension mismatch");
  const std::size_t n = spectrum.size();
  FamilyKernel kernel = [&](const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq) {
    std::vector<Complex> v(rule.size());
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      v[i] = f(rule.nodes[i]);
      if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
        throw QuadratureError("coefficients: non-finite function value at a quadrature node");
      s += rule.weights[i] * std::norm(v[i]);
    }
    const PointSet y = kernels::map_points(phi, rule.nodes);
    kernels::weighted_transform(y, rule.weights, v, 1, spectrum.points, -1.0, sums);
    for (double& q : sum_sq) q += s;
  };
  FamilyEstimate est = integrate_family(mu, n, kernel, quad, false);
  CoefficientReport report;
  const double tol = requested_tolerance(quad);
  report.values = std::move(est.values);
  report.errors = std::move(est.errors);
  report.flagged.resize(n);
  for (std::size_t k = 0; k < n; ++k) report.flagged[k] = !(report.errors[k] <= tol);
  report.truncation = spectrum.describe();
  report.quad = est.used;
  return report;
}

Integrand synthesize(std::vector<Complex> c, const PhaseMap& phi, const SpectrumSet& spectrum) {
  if (c.size() != spectrum.size()) throw DomainError("synthesize: one coefficient per frequency required");
  return [c = std::move(c), phi, points = spectrum.points](std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(phi.out_dim()));
    phi.eval(x, y);
    Complex s{};
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == Complex{}) continue;
      double t = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) t += points[k][j] * y[j];
      s += c[k] * unit_phase(t);
    }
    return s;
  };
}

L2Error l2_error(const Integrand& f, const Integrand& g, const Measure& mu, const QuadratureSpec& quad) {
  const IntegralEstimate e = integrate([&](std::span<const double> x) { return Complex{std::norm(f(x) - g(x)), 0.0}; }, mu, quad);
  const double sq = std::max(0.0, e.value.real());
  L2Error out;
  out.value = std::sqrt(sq);
  // d sqrt(s) = ds / (2 sqrt(s)), bounded by sqrt(ds) near zero.
  out.error = sq > 0.0 ? std::min(std::sqrt(e.error), e.error / (2.0 * out.value)) : std::sqrt(e.error);
  return out;
}

}  // namespace nlphase
