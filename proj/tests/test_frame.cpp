#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "nlphase/frame.hpp"

using namespace nlphase;

namespace {

SpectrumSet integers(double R) { return lattice(Mat::Identity(1, 1), R); }

// Eigenvalues of T*T for normalized indicators of M equal cells of [0,1]:
// (T*T)_{ij} = sum_k (1/h) |s(k)|^2 e^{2 pi i k (i - j) h}, s(k) = int_0^h e^{-2 pi i k x} dx.
Vec toeplitz_eigenvalues(int M, int R, int step) {
  const double h = 1.0 / M;
  CMat G = CMat::Zero(M, M);
  for (int k = -R; k <= R; ++k) {
    if (k % step != 0) continue;
    const double s2 = k == 0 ? h * h : std::pow(std::sin(kPi * k * h) / (kPi * k), 2);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) G(i, j) += s2 / h * std::polar(1.0, kTwoPi * k * (i - j) * h);
  }
  return Eigen::SelfAdjointEigenSolver<CMat>(G).eigenvalues();
}

}  // namespace

TEST(Frame, IntegersOnUnitIntervalMatchToeplitzOracle) {
  const FrameBoundsReport r = frame_bounds(Measure::unit_interval(), PhaseMap::identity(1), integers(256), TensorGauss{});
  const Vec ev = toeplitz_eigenvalues(64, 256, 1);
  EXPECT_NEAR(r.A, ev.minCoeff(), 1e-10);
  EXPECT_NEAR(r.B, ev.maxCoeff(), 1e-10);
  EXPECT_GE(r.A, 0.9);
  EXPECT_LE(r.A, 1.0);
  EXPECT_GE(r.B, 0.99);
  EXPECT_LE(r.B, 1.01);
  EXPECT_EQ(r.M, 64);
  EXPECT_EQ(r.K, 513u);
  EXPECT_LE(r.orthonormality_dev, 1e-10);
}

TEST(Frame, EvenIntegersAreNotAFrame) {
  const FrameBoundsReport r =
      frame_bounds(Measure::unit_interval(), PhaseMap::identity(1), lattice(Mat::Constant(1, 1, 2.0), 256), TensorGauss{});
  EXPECT_LE(r.A, 0.1);
  EXPECT_NEAR(r.A, toeplitz_eigenvalues(64, 256, 2).minCoeff(), 1e-10);
}

TEST(Frame, HalfIntervalIsTight) {
  const Measure half = Measure::lebesgue_box(Vec::Zero(1), Vec::Constant(1, 0.5));
  const FrameBoundsReport r = frame_bounds(half, PhaseMap::identity(1), integers(256), TensorGauss{});
  EXPECT_GE(r.A, 0.9);
  EXPECT_LE(r.A, 1.01);
  EXPECT_GE(r.B, 0.9);
  EXPECT_LE(r.B, 1.01);
}

TEST(Frame, MonotoneInTruncation) {
  const Measure half = Measure::lebesgue_box(Vec::Zero(1), Vec::Constant(1, 0.5));
  FrameBoundsReport prev;
  bool first = true;
  for (double R : {64.0, 128.0, 256.0}) {
    const FrameBoundsReport r = frame_bounds(half, PhaseMap::identity(1), integers(R), TensorGauss{});
    if (!first) {
      EXPECT_GE(r.A, prev.A - r.quad_error - 1e-12) << R;
      EXPECT_GE(r.B, prev.B - 1e-12) << R;
    }
    EXPECT_LE(r.A, r.B);
    prev = r;
    first = false;
  }
}

TEST(Frame, SingularValuesSortedAndSquared) {
  const FrameBoundsReport r = frame_bounds(Measure::unit_interval(), PhaseMap::identity(1), integers(32), TensorGauss{});
  ASSERT_FALSE(r.singular_values.empty());
  EXPECT_NEAR(r.B, r.singular_values.front() * r.singular_values.front(), 1e-15);
  EXPECT_NEAR(r.A, r.singular_values.back() * r.singular_values.back(), 1e-15);
  EXPECT_FALSE(r.bias.empty());
}

TEST(Frame, LegendreBasis) {
  FrameOptions opt;
  opt.basis = TestBasis::Legendre;
  opt.M = 4;
  const FrameBoundsReport r = frame_bounds(Measure::unit_interval(), PhaseMap::identity(1), integers(128), TensorGauss{}, opt);
  EXPECT_EQ(r.M, 4);
  EXPECT_LE(r.orthonormality_dev, 1e-10);
  // Coefficients of degree <= 3 polynomials decay like 1/k, so the tail past 128 is below 5%.
  EXPECT_GT(r.A, 0.95);
  EXPECT_LE(r.B, 1.0 + 1e-10);
}

TEST(Frame, InvalidCellCountThrows) {
  FrameOptions opt;
  opt.M = 48;
  EXPECT_THROW(frame_bounds(Measure::unit_interval(), PhaseMap::identity(1), integers(8), TensorGauss{}, opt), DomainError);
}
