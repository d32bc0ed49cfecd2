#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlphase/measure.hpp"
#include "oracles.hpp"

using namespace nlphase;

namespace {

Measure nu4() { return Measure::uniform_self_similar(4, {0.0, 2.0}, 30); }

PhaseMap binary_quaternary_map() { return PhaseMap::digit_map({2, {0, 1}, 4, {0, 2}, 30}); }

Integrand exp_integrand(double freq) {
  return [freq](std::span<const double> x) { return unit_phase(freq * x[0]); };
}

}  // namespace

TEST(Integrate, LebesgueTotalMass) {
  const auto e = integrate([](std::span<const double>) { return Complex(1.0); }, Measure::unit_interval(), TensorGauss{});
  // Exact up to the rounding of 32 Gauss weights.
  EXPECT_NEAR(e.value.real(), 1.0, 4 * std::numeric_limits<double>::epsilon());
  EXPECT_EQ(e.value.imag(), 0.0);
}

TEST(Integrate, IntegerFrequencyVanishes) {
  const auto e = integrate(exp_integrand(3.0), Measure::unit_interval(), TensorGauss{32, 1, 1e-12, 512});
  EXPECT_LE(std::abs(e.value), 1e-12);
}

TEST(Integrate, Nu4AgainstDigitSampler) {
  const auto e = integrate(exp_integrand(1.0), nu4(), DigitScheme{30});
  const auto mc = oracle::mc_digit_entry(1.0, 1000000, 7);
  EXPECT_LE(std::abs(e.value - mc.mean), 3.0 * mc.sigma);
}

TEST(Integrate, TotalMassForEveryKind) {
  const auto one = [](std::span<const double>) { return Complex(1.0); };
  EXPECT_NEAR(integrate(one, Measure::lebesgue_box(Vec::Constant(2, -1.0), Vec::Constant(2, 2.0)), TensorGauss{}).value.real(),
              9.0, 1e-12);
  EXPECT_NEAR(integrate(one, Measure::lebesgue_disc(Vec::Zero(2), 1.0), AdaptiveScheme{1e-8}).value.real(), kPi, 1e-6);
  EXPECT_NEAR(integrate(one, nu4(), DigitScheme{}).value.real(), 1.0, 1e-14);
  EXPECT_NEAR(integrate(one, pushforward(Measure::unit_interval(), binary_quaternary_map()), DigitScheme{}).value.real(), 1.0, 1e-14);
}

TEST(Integrate, SchemeMismatchThrows) {
  EXPECT_THROW(integrate(exp_integrand(1.0), Measure::unit_cube(2), DigitScheme{}), QuadratureError);
  EXPECT_THROW(integrate(exp_integrand(1.0), Measure::lebesgue_disc(Vec::Zero(2), 1.0), DigitScheme{}), QuadratureError);
}

TEST(Integrate, NonFiniteIntegrandThrows) {
  const Integrand bad = [](std::span<const double> x) { return Complex(1.0 / (x[0] - x[0])); };
  EXPECT_THROW(integrate(bad, Measure::unit_interval(), TensorGauss{}), QuadratureError);
}

TEST(Integrate, ChangeOfVariables) {
  const PhaseMap sq = PhaseMap::custom(1, 1, [](std::span<const double> x, std::span<double> y) { y[0] = x[0] * x[0]; });
  const Measure mu = Measure::unit_interval();
  for (double k : {1.0, 2.5, 7.0}) {
    const auto direct = integrate([k](std::span<const double> x) { return unit_phase(k * x[0] * x[0]); }, mu, TensorGauss{});
    const auto pushed = integrate(exp_integrand(k), pushforward(mu, sq), TensorGauss{});
    EXPECT_LE(std::abs(direct.value - pushed.value), 1e-12 + direct.error + pushed.error);
  }
  const auto id = integrate(exp_integrand(0.3), pushforward(mu, PhaseMap::identity(1)), TensorGauss{});
  EXPECT_EQ(id.value, integrate(exp_integrand(0.3), mu, TensorGauss{}).value);
}

TEST(Integrate, DigitDepthRefinementIsLipschitzBounded) {
  // Truncating at level D moves each node by at most rho^-D * max digit / (rho - 1).
  const Measure shallow = Measure::uniform_self_similar(4, {0.0, 2.0}, 6);
  const Measure deep = Measure::uniform_self_similar(4, {0.0, 2.0}, 11);
  for (double xi : {1.0, 3.0, 16.0, -9.0}) {
    const auto a = integrate(exp_integrand(xi), shallow, DigitScheme{6});
    const auto b = integrate(exp_integrand(xi), deep, DigitScheme{11});
    EXPECT_LE(std::abs(a.value - b.value), kTwoPi * std::abs(xi) * std::pow(4.0, -6) * 2.0 / 3.0 + 1e-14) << xi;
  }
}

TEST(Sample, LebesgueMean) {
  const PointSet p = sample(Measure::unit_interval(), 100000, 11);
  double mean = 0.0;
  for (double x : p.coords) mean += x;
  mean /= 100000.0;
  EXPECT_GE(mean, 0.497);
  EXPECT_LE(mean, 0.503);
}

TEST(Sample, CantorThirdsAvoidMiddle) {
  const int depth = 30;
  const PointSet p = sample(Measure::uniform_self_similar(3, {0.0, 2.0}, depth), 20000, 3);
  const double slack = std::pow(3.0, -depth);
  for (double x : p.coords) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    EXPECT_FALSE(x > 1.0 / 3.0 + slack && x < 2.0 / 3.0 - slack) << x;
  }
}

TEST(Sample, DiscIsUniformInside) {
  const PointSet p = sample(Measure::lebesgue_disc(Vec::Zero(2), 2.0), 50000, 5);
  std::size_t inner = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = std::hypot(p[i][0], p[i][1]);
    EXPECT_LE(r, 2.0);
    if (r < 1.0) ++inner;
  }
  // P(r < 1) = 1/4, sigma = sqrt(3/16 / n)
  EXPECT_NEAR(static_cast<double>(inner) / 50000.0, 0.25, 4.0 * std::sqrt(3.0 / 16.0 / 50000.0));
}

TEST(Sample, DeterministicUnderSeed) {
  const Measure m = nu4();
  EXPECT_EQ(sample(m, 5000, 42).coords, sample(m, 5000, 42).coords);
  EXPECT_NE(sample(m, 5000, 42).coords, sample(m, 5000, 43).coords);
}

TEST(Sample, DigitPushforwardMatchesDirectNu4) {
  const PointSet a = sample(pushforward(Measure::unit_interval(), binary_quaternary_map()), 100000, 1);
  const PointSet b = sample(nu4(), 100000, 2);
  EXPECT_LE(ks_distance(a.coords, b.coords), 0.01);
}

TEST(Pushforward, DigitMapTransformMatchesNu4Hat) {
  const Measure pf = pushforward(Measure::unit_interval(), binary_quaternary_map());
  const oracle::cd expected[] = {oracle::kNu4Hat1, oracle::kNu4Hat2, oracle::kNu4Hat3};
  for (int lam = 1; lam <= 3; ++lam) {
    const auto e = integrate(exp_integrand(lam), pf, DigitScheme{30});
    EXPECT_LE(std::abs(e.value - expected[lam - 1]), 1e-6) << lam;
  }
}

TEST(Pushforward, AxbFlowGivesReciprocalDensity) {
  const Measure base = Measure::lebesgue_box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  const PhaseMap phi = PhaseMap::group_exp({Mat::Ones(1, 1)}, Vec::Ones(1));
  const PointSet p = sample(pushforward(base, phi), 100000, 9);
  // density 1/x on [1/e, e] normalized by 2
  const auto cdf = [](double x) { return std::clamp((std::log(x) + 1.0) / 2.0, 0.0, 1.0); };
  EXPECT_LE(ks_distance(p.coords, cdf), 0.01);
}

TEST(Pushforward, DimensionMismatchThrows) {
  EXPECT_THROW(pushforward(Measure::unit_interval(), PhaseMap::holhos()), DomainError);
}

TEST(Fourier, ZeroFrequencyIsMass) {
  EXPECT_NEAR(std::abs(fourier_transform(nu4(), Vec::Zero(1)) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(fourier_transform(Measure::lebesgue_box(Vec::Zero(2), Vec::Constant(2, 3.0)), Vec::Zero(2)).real(), 9.0, 1e-12);
}

TEST(Fourier, Nu4AtSmallIntegers) {
  EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, 1.0)) - oracle::kNu4Hat1), 1e-10);
  EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, 2.0)) - oracle::kNu4Hat2), 1e-10);
  EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, 3.0)) - oracle::kNu4Hat3), 1e-10);
}

TEST(Fourier, Nu4AtOneAgainstSampler) {
  const auto mc = oracle::mc_digit_entry(1.0, 1000000, 123);
  EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, 1.0)) - mc.mean), 3.0 * mc.sigma);
}

TEST(Fourier, Nu4SpectrumOrthogonality) {
  // Lambda_4 truncated at n = 4: finite sums of 4^j l_j with l_j in {0, 1}, j < 4.
  std::vector<double> lam;
  for (int mask = 0; mask < 16; ++mask) {
    double v = 0.0;
    for (int j = 0; j < 4; ++j)
      if (mask & (1 << j)) v += std::pow(4.0, j);
    lam.push_back(v);
  }
  for (double a : lam)
    for (double b : lam)
      if (a != b) {
        EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, a - b), 40)), 1e-10) << a << " " << b;
      }
}

TEST(Fourier, HermitianAndBoxClosedForm) {
  const Measure box = Measure::lebesgue_box(Vec::Zero(1), Vec::Constant(1, 2.0));
  for (double xi : {0.3, 1.7, -4.2}) {
    const Complex f = fourier_transform(box, Vec::Constant(1, xi));
    EXPECT_EQ(fourier_transform(box, Vec::Constant(1, -xi)), std::conj(f));
    const Complex expected = (std::exp(Complex(0.0, kTwoPi * xi * 2.0)) - 1.0) / Complex(0.0, kTwoPi * xi);
    EXPECT_LE(std::abs(f - expected), 1e-13);
    const Complex g = fourier_transform(nu4(), Vec::Constant(1, xi));
    EXPECT_LE(std::abs(fourier_transform(nu4(), Vec::Constant(1, -xi)) - std::conj(g)), 1e-15);
  }
}

TEST(Fourier, ProductFormulaMatchesOracleProduct) {
  const SelfSimilar s{4, {0.0, 2.0}, {0.5, 0.5}, 30};
  for (double xi : {0.5, 2.0, 5.0, 37.0}) {
    EXPECT_LE(std::abs(self_similar_product(s, xi, 60) - oracle::nu4_hat(xi, 60)), 1e-13);
  }
  EXPECT_NO_THROW(require_product_formula(s));
}

TEST(KnownPushforward, RecognizesBinaryToQuaternaryMap) {
  const auto k = known_pushforward(Measure::unit_interval(), binary_quaternary_map());
  ASSERT_TRUE(k.has_value());
  EXPECT_EQ(k->measure.ratio, 4);
  EXPECT_EQ(k->levels, 30);
  EXPECT_FALSE(known_pushforward(Measure::unit_interval(), PhaseMap::identity(1)).has_value());
}

TEST(KsDistance, KnownValues) {
  EXPECT_DOUBLE_EQ(ks_distance({0.5}, [](double x) { return x; }), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance({0.1, 0.2}, {0.8, 0.9}), 1.0);
}
