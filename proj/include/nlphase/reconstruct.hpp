#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlphase/measure.hpp"
#include "nlphase/phase_map.hpp"
#include "nlphase/spectrum.hpp"

namespace nlphase {

struct CoefficientReport {
  std::vector<Complex> values;
  std::vector<double> errors;
  /// Entries whose error estimate misses the requested tolerance.
  std::vector<bool> flagged;
  std::string truncation;
  QuadratureSpec quad;
};

/// c_lambda = int f(x) e^{-2 pi i lambda . phi(x)} dmu(x).
CoefficientReport coefficients(const Integrand& f, const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum,
                               const QuadratureSpec& quad);

/// x -> sum_lambda c_lambda e^{2 pi i lambda . phi(x)}.
Integrand synthesize(std::vector<Complex> c, const PhaseMap& phi, const SpectrumSet& spectrum);

struct L2Error {
  double value = 0.0;
  double error = 0.0;
};

/// ||f - g|| in L^2(mu).
L2Error l2_error(const Integrand& f, const Integrand& g, const Measure& mu, const QuadratureSpec& quad);

}  // namespace nlphase
