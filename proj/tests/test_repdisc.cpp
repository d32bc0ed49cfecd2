#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "nlphase/matrix_exp.hpp"
#include "nlphase/repdisc.hpp"

using namespace nlphase;

namespace {

Mat E(int d, int i, int j) {
  Mat m = Mat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

Vec v1(double a) { return Vec::Constant(1, a); }

WindowSystem heisenberg_system(double radius) {
  WindowSystem ws;
  ws.omega = Box{Vec::Zero(1), Vec::Ones(1)};
  for (int g = -4; g <= 4; ++g) ws.gammas.push_back(v1(g));
  ws.spectrum = embed(lattice(Mat::Identity(1, 1), radius), 2, {1});
  ws.phi = phase_from_group(group_preset("heisenberg"));
  return ws;
}

}  // namespace

TEST(MatrixExp, AgreesWithEigenMatrixFunctions) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n01;
  for (int d : {1, 2, 3, 5}) {
    for (double scale : {1e-3, 0.5, 3.0, 12.0}) {
      Mat A(d, d);
      for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = scale * n01(gen);
      const Mat ref = A.exp();
      EXPECT_LE((expm(A) - ref).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, ref.cwiseAbs().maxCoeff())) << d << " " << scale;
    }
  }
  EXPECT_EQ(expm(Mat::Zero(3, 3)), Mat::Identity(3, 3));
  EXPECT_THROW(expm(Mat::Constant(1, 1, 1000.0)), DomainError);
}

TEST(GroupPhase, ZeroGeneratorIsConstant) {
  const Vec ell{{0.3, -1.2, 2.0}};
  const PhaseMap phi = phase_from_group({{Mat::Zero(3, 3)}, ell});
  for (double t : {-2.0, 0.0, 0.7}) EXPECT_EQ(phi(v1(t)), ell);
}

TEST(GroupPhase, Heisenberg) {
  const PhaseMap phi = phase_from_group(group_preset("heisenberg"));
  for (double t : {-3.0, -0.25, 0.0, 0.5, 2.75}) {
    const Vec y = phi(v1(t));
    EXPECT_EQ(y[0], 1.0);
    EXPECT_EQ(y[1], -t);
  }
}

TEST(GroupPhase, PolynomialPhase) {
  const PhaseMap phi = phase_from_group(group_preset("poly2d"));
  for (const auto& [t1, t2] : std::vector<std::pair<double, double>>{{0.5, 0.25}, {-1.5, 2.0}, {0.3, -0.7}}) {
    const Vec y = phi(Vec{{t1, t2}});
    EXPECT_NEAR(y[0], 1.0, 1e-15);
    EXPECT_NEAR(y[1], -t1, 1e-15);
    EXPECT_NEAR(y[2], -t2 + t1 * t1 / 2.0, 1e-15);
  }
}

TEST(GroupPhase, Shearlet) {
  const PhaseMap phi = phase_from_group(group_preset("shearlet"));
  for (const auto& [t1, t2] : std::vector<std::pair<double, double>>{{0.5, 0.25}, {-1.5, 2.0}, {1.3, -0.7}}) {
    const Vec y = phi(Vec{{t1, t2}});
    EXPECT_NEAR(y[0], std::exp(-t1), 1e-13);
    EXPECT_NEAR(y[1], -t2 * std::exp(-t1), 1e-13);
  }
}

TEST(GroupPhase, AxbIsDecayingExponential) {
  const PhaseMap phi = phase_from_group(group_preset("axb"));
  for (double t : {-1.0, 0.0, 0.4}) EXPECT_NEAR(phi(v1(t))[0], std::exp(-t), 1e-15);
}

TEST(GroupPhase, CommutingFlowIdentity) {
  // B commutes with every polynomial in B.
  const Mat B{{0.2, 1.0, 0.0}, {0.0, -0.3, 0.5}, {0.1, 0.0, 0.4}};
  const GroupData custom{{B, B * B - 0.5 * B}, Vec{{1.0, 0.5, -0.25}}};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const GroupData& g : {group_preset("poly2d"), group_preset("shearlet"), custom}) {
    const PhaseMap phi = phase_from_group(g);
    for (int trial = 0; trial < 20; ++trial) {
      Vec t(g.m());
      Vec s(g.m());
      for (int k = 0; k < g.m(); ++k) {
        t[k] = u(gen);
        s[k] = u(gen);
      }
      Mat S = Mat::Zero(g.d(), g.d());
      for (int k = 0; k < g.m(); ++k) S += s[k] * g.A[static_cast<std::size_t>(k)];
      const Vec lhs = phi(Vec(t + s));
      const Vec rhs = Mat((-S).exp()).transpose() * phi(t);
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(GroupPhase, JacobianIsMinusGeneratorAction) {
  const GroupData g = group_preset("shearlet");
  const PhaseMap phi = phase_from_group(g);
  const Vec t{{0.3, -0.6}};
  const Mat J = phi.jacobian(t);
  const Mat fd = finite_difference_jacobian(phi, t, 1e-6);
  EXPECT_LE((J - fd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GroupData, NonCommutingGeneratorsThrow) {
  EXPECT_THROW(validate(GroupData{{E(2, 0, 1), E(2, 1, 0)}, Vec::Ones(2)}), DomainError);
  EXPECT_THROW(phase_from_group({{E(2, 0, 1), E(2, 1, 0)}, Vec::Ones(2)}), DomainError);
  EXPECT_THROW(validate(GroupData{{Mat::Identity(3, 3)}, Vec::Ones(2)}), DomainError);
  EXPECT_THROW(group_preset("lorentz"), DomainError);
  EXPECT_EQ(group_preset_names().size(), 4u);
}

TEST(Atoms, ZeroFrequencyIsIndicator) {
  const WindowSystem ws = heisenberg_system(2);
  const std::size_t zero = 2;  // lambda index of 0 in {-2..2}
  const std::size_t g0 = 4;    // gamma index of 0
  EXPECT_EQ(atom(ws, zero, g0, v1(0.0)), Complex(1.0));
  EXPECT_EQ(atom(ws, zero, g0, v1(0.999)), Complex(1.0));
  EXPECT_EQ(atom(ws, zero, g0, v1(1.0)), Complex(0.0));
  EXPECT_EQ(atom(ws, zero, g0, v1(-0.1)), Complex(0.0));
}

TEST(Atoms, HeisenbergReproducesGabor) {
  const WindowSystem ws = heisenberg_system(4);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = u(gen);
    for (std::size_t a = 0; a < ws.spectrum.size(); ++a)
      for (std::size_t g = 0; g < ws.gammas.size(); ++g) {
        const double k = ws.spectrum.points[a][1];
        const double gamma = ws.gammas[g][0];
        const bool inside = s - gamma >= 0.0 && s - gamma < 1.0;
        const Complex gabor = inside ? std::polar(1.0, -kTwoPi * k * (s - gamma)) : Complex(0.0);
        EXPECT_LE(std::abs(atom(ws, a, g, v1(s)) - gabor), 1e-12);
      }
  }
}

TEST(Atoms, PolynomialPhaseAtoms) {
  WindowSystem ws;
  ws.omega = Box{Vec::Zero(2), Vec::Ones(2)};
  ws.gammas = {Vec{{0.0, 0.0}}, Vec{{1.0, -1.0}}};
  ws.spectrum = embed(lattice(Mat::Identity(2, 2), 1), 3, {1, 2});
  ws.phi = phase_from_group(group_preset("poly2d"));
  const Vec s{{1.3, -0.6}};
  for (std::size_t a = 0; a < ws.spectrum.size(); ++a) {
    const double l1 = ws.spectrum.points[a][1];
    const double l2 = ws.spectrum.points[a][2];
    const double t1 = s[0] - 1.0;
    const double t2 = s[1] + 1.0;
    const Complex expected = std::polar(1.0, kTwoPi * (-t1 * l1 + (-t2 + t1 * t1 / 2.0) * l2));
    EXPECT_LE(std::abs(atom(ws, a, 1, s) - expected), 1e-12);
    EXPECT_EQ(atom(ws, a, 0, s), Complex(0.0));
  }
}

TEST(Atoms, AxbDilatedActionMatchesShiftedAtom) {
  WindowSystem ws;
  ws.omega = Box{v1(-0.5), v1(0.5)};
  ws.gammas = {v1(-1.0), v1(0.0), v1(1.0)};
  ws.spectrum = lattice(Mat::Constant(1, 1, 0.7), 3);
  ws.phi = phase_from_group(group_preset("axb"));
  for (std::size_t g = 0; g < ws.gammas.size(); ++g)
    for (std::size_t a = 0; a < ws.spectrum.size(); ++a)
      for (double s : {-1.2, -0.3, 0.2, 0.9, 1.4}) {
        const double kappa = ws.gammas[g][0];
        const Vec x = v1(std::exp(kappa) * ws.spectrum.points[a][0]);
        EXPECT_LE(std::abs(group_action(ws.phi, ws.omega, x, v1(kappa), v1(s)) - atom(ws, a, g, v1(s))), 1e-12);
      }
}

TEST(WindowSystem, OverlappingTranslatesRejected) {
  WindowSystem ws = heisenberg_system(2);
  ws.gammas.push_back(v1(0.5));
  EXPECT_THROW(validate(ws), DomainError);
}

TEST(Verify, HeisenbergBlocksAreIdentity) {
  const WindowSystem ws = heisenberg_system(8);
  const RepdiscReport r = verify_system_on_window(ws, Box{v1(-2.0), v1(3.0)}, TensorGauss{32, 1, 1e-13, 512});
  ASSERT_EQ(r.blocks.size(), 5u);
  EXPECT_LE(r.max_offdiag, 1e-10);
  EXPECT_LE(r.max_diag_dev, 1e-10);
  EXPECT_EQ(r.cross_block_max, 0.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_FALSE(r.scope.empty());
}

TEST(Verify, MisalignedWindowThrows) {
  const WindowSystem ws = heisenberg_system(2);
  EXPECT_THROW(verify_system_on_window(ws, Box{v1(-2.5), v1(3.0)}, TensorGauss{}), DomainError);
  EXPECT_THROW(verify_system_on_window(ws, Box{v1(-9.0), v1(3.0)}, TensorGauss{}), DomainError);
}

TEST(Verify, PolynomialPhasePasses) {
  WindowSystem ws;
  ws.omega = Box{Vec::Zero(2), Vec::Ones(2)};
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) ws.gammas.push_back(Vec{{double(a), double(b)}});
  ws.spectrum = embed(lattice(Mat::Identity(2, 2), 2), 3, {1, 2});
  ws.phi = phase_from_group(group_preset("poly2d"));
  RepdiscOptions opt;
  opt.tol = 1e-8;
  const RepdiscReport r = verify_system_on_window(ws, Box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)}, TensorGauss{}, opt);
  EXPECT_EQ(r.blocks.size(), 4u);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Verify, AxbFrameBounds) {
  const double eps = 0.5;
  WindowSystem ws;
  ws.omega = Box{v1(-eps), v1(eps)};
  ws.gammas = {v1(-1.0), v1(0.0), v1(1.0)};
  ws.spectrum = lattice(Mat::Constant(1, 1, 1.0 / (std::exp(eps) - std::exp(-eps))), 200);
  ws.phi = phase_from_group(group_preset("axb"));
  RepdiscOptions opt;
  opt.mode = RepMode::Frame;
  opt.frame.M = 16;
  const RepdiscReport r = verify_system_on_window(ws, Box{v1(-1.5), v1(1.5)}, TensorGauss{}, opt);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_GT(r.min_A, 0.0);
  EXPECT_LE(r.min_A, r.max_B);
  EXPECT_TRUE(std::isfinite(r.max_B));
}

TEST(Pushforward, AxbReciprocalLaw) {
  const double eps = 0.5;
  const auto cdf = [eps](double y) { return std::clamp((std::log(y) + eps) / (2.0 * eps), 0.0, 1.0); };
  EXPECT_LE(pushforward_ks(phase_from_group(group_preset("axb")), Box{v1(-eps), v1(eps)}, cdf, 100000, 1), 0.01);
  // the uniform law on the image interval is rejected
  const double lo = std::exp(-eps);
  const double hi = std::exp(eps);
  const auto flat = [lo, hi](double y) { return std::clamp((y - lo) / (hi - lo), 0.0, 1.0); };
  EXPECT_GT(pushforward_ks(phase_from_group(group_preset("axb")), Box{v1(-eps), v1(eps)}, flat, 100000, 1), 0.01);
}
