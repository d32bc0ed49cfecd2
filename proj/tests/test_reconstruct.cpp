#include <gtest/gtest.h>

#include <cmath>

#include "nlphase/reconstruct.hpp"
#include "oracles.hpp"

using namespace nlphase;

namespace {

SpectrumSet integers(double R) { return lattice(Mat::Identity(1, 1), R); }

const Integrand kOne = [](std::span<const double>) { return Complex(1.0); };
const Integrand kRamp = [](std::span<const double> x) { return Complex(x[0]); };

const QuadratureSpec kGauss64 = TensorGauss{64, 1, 1e-12, 512};

}  // namespace

TEST(Coefficients, ConstantFunction) {
  const auto c = coefficients(kOne, Measure::unit_interval(), PhaseMap::identity(1), integers(8), kGauss64);
  ASSERT_EQ(c.values.size(), 17u);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_LE(std::abs(c.values[i] - (i == 8 ? 1.0 : 0.0)), 1e-12) << i;
  for (bool f : c.flagged) EXPECT_FALSE(f);
}

TEST(Coefficients, RampMatchesAnalyticSeries) {
  const auto c = coefficients(kRamp, Measure::unit_interval(), PhaseMap::identity(1), integers(16), kGauss64);
  for (int k = -16; k <= 16; ++k) {
    const Complex expected = k == 0 ? Complex(0.5) : Complex(0.0, 1.0 / (2.0 * kPi * k));
    EXPECT_LE(std::abs(c.values[static_cast<std::size_t>(k + 16)] - expected), 1e-10) << k;
  }
  EXPECT_FALSE(c.truncation.empty());
}

TEST(Coefficients, ConstantOnThirdsCantorWithDigitPhase) {
  const Measure nu3 = Measure::uniform_self_similar(3, {0.0, 2.0}, 30);
  const PhaseMap phi = PhaseMap::digit_map({3, {0, 2}, 4, {0, 2}, 30});
  const auto c = coefficients(kOne, nu3, phi, lambda4(4), DigitScheme{});
  EXPECT_LE(std::abs(c.values[0] - 1.0), 1e-6);
  for (std::size_t i = 1; i < c.values.size(); ++i) EXPECT_LE(std::abs(c.values[i]), 1e-6) << i;
}

TEST(Coefficients, Linear) {
  const Integrand mix = [](std::span<const double> x) { return Complex(2.0 * x[0], -3.0); };
  const auto a = coefficients(kRamp, Measure::unit_interval(), PhaseMap::identity(1), integers(6), kGauss64);
  const auto b = coefficients(kOne, Measure::unit_interval(), PhaseMap::identity(1), integers(6), kGauss64);
  const auto m = coefficients(mix, Measure::unit_interval(), PhaseMap::identity(1), integers(6), kGauss64);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const Complex lin = 2.0 * a.values[i] + Complex(0.0, -3.0) * b.values[i];
    EXPECT_LE(std::abs(m.values[i] - lin), 2.0 * (m.errors[i] + 2.0 * a.errors[i] + 3.0 * b.errors[i]) + 1e-14);
  }
}

TEST(Synthesize, DeltaAndZero) {
  const SpectrumSet s = integers(3);
  std::vector<Complex> delta(7, 0.0);
  delta[3] = 1.0;
  const PhaseMap phi = PhaseMap::custom(1, 1, [](std::span<const double> x, std::span<double> y) { y[0] = x[0] * x[0]; });
  const Integrand one = synthesize(delta, phi, s);
  const Integrand zero = synthesize(std::vector<Complex>(7, 0.0), phi, s);
  for (double x : {0.0, 0.3, 0.9}) {
    const Vec p = Vec::Constant(1, x);
    EXPECT_EQ(one(as_span(p)), Complex(1.0));
    EXPECT_EQ(zero(as_span(p)), Complex(0.0));
  }
}

TEST(Synthesize, RampPartialSumAtQuarter) {
  const auto c = coefficients(kRamp, Measure::unit_interval(), PhaseMap::identity(1), integers(16), kGauss64);
  const Integrand g = synthesize(c.values, PhaseMap::identity(1), integers(16));
  // partial Fourier sum 1/2 + sum_{0<|k|<=16} i/(2 pi k) e^{2 pi i k/4}
  Complex partial = 0.5;
  for (int k = -16; k <= 16; ++k)
    if (k != 0) partial += Complex(0.0, 1.0 / (2.0 * kPi * k)) * std::polar(1.0, kTwoPi * k * 0.25);
  const Vec x = Vec::Constant(1, 0.25);
  EXPECT_LE(std::abs(g(as_span(x)) - partial), 1e-10);
  EXPECT_LE(std::abs(partial - 0.25), 1.0 / (kPi * 16.0));
}

TEST(L2Error, TrivialCases) {
  EXPECT_EQ(l2_error(kRamp, kRamp, Measure::unit_interval(), kGauss64).value, 0.0);
  const Integrand zero = [](std::span<const double>) { return Complex(0.0); };
  const Measure nu4 = Measure::uniform_self_similar(4, {0.0, 2.0}, 30);
  EXPECT_NEAR(l2_error(kOne, zero, nu4, DigitScheme{}).value, 1.0, 1e-14);
}

TEST(L2Error, RampPartialSumTail) {
  const auto c = coefficients(kRamp, Measure::unit_interval(), PhaseMap::identity(1), integers(16), kGauss64);
  const Integrand g = synthesize(c.values, PhaseMap::identity(1), integers(16));
  const L2Error e = l2_error(kRamp, g, Measure::unit_interval(), kGauss64);
  EXPECT_NEAR(e.value * e.value, oracle::kRampL2Sq16, 0.1 * oracle::kRampL2Sq16);
  EXPECT_NEAR(e.value * e.value, oracle::kRampL2Sq16, 1e-8);
}

TEST(L2Error, DecreasesWithTruncation) {
  double prev = INFINITY;
  for (double R : {2.0, 4.0, 8.0, 16.0}) {
    const auto c = coefficients(kRamp, Measure::unit_interval(), PhaseMap::identity(1), integers(R), kGauss64);
    const double e = l2_error(kRamp, synthesize(c.values, PhaseMap::identity(1), integers(R)), Measure::unit_interval(), kGauss64).value;
    EXPECT_LT(e, prev) << R;
    prev = e;
  }
}
