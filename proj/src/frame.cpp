#include "nlphase/frame.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "nlphase/kernels.hpp"

namespace nlphase {

namespace {

int integer_root(int M, int d) {
  const int r = static_cast<int>(std::lround(std::pow(static_cast<double>(M), 1.0 / d)));
  int p = 1;
  for (int k = 0; k < d; ++k) p *= r;
  if (p != M) throw DomainError("frame_bounds: M = " + std::to_string(M) + " is not a " + std::to_string(d) + "-th power");
  return r;
}

// Orthonormal Legendre polynomial of degree n on [lo, hi].
double legendre(int n, double x, double lo, double hi) {
  const double t = 2.0 * (x - lo) / (hi - lo) - 1.0;
  double p0 = 1.0;
  double p1 = t;
  if (n == 0) p1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1 * std::sqrt((2.0 * n + 1.0) / (hi - lo));
}

}  // namespace

FrameBoundsReport frame_bounds(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum,
                               const QuadratureSpec& quad, const FrameOptions& options) {
  if (phi.in_dim() != mu.dim() || phi.out_dim() != spectrum.dim()) throw DomainError("frame_bounds: dimension mismatch");
  if (options.M < 1) throw DomainError("frame_bounds: M must be >= 1");
  const int d = mu.dim();
  const Box box = mu.support_box();
  const int per_axis = integer_root(options.M, d);

  QuadratureSpec spec = quad;
  std::function<void(std::span<const double>, std::span<double>)> basis;
  std::ostringstream family;
  if (options.basis == TestBasis::Dyadic) {
    if ((per_axis & (per_axis - 1)) != 0) throw DomainError("frame_bounds: dyadic cells per axis must be a power of two");
    // Align tensor panels with the cells so every panel sees a constant indicator.
    if (auto* t = std::get_if<TensorGauss>(&spec)) {
      t->panels = per_axis * ((t->panels + per_axis - 1) / per_axis);
      t->max_panels = std::max(t->max_panels, t->panels);
    }
    basis = [box, per_axis, d](std::span<const double> x, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      std::size_t idx = 0;
      for (int k = 0; k < d; ++k) {
        const double u = (x[k] - box.lo[k]) / (box.hi[k] - box.lo[k]);
        const int c = std::clamp(static_cast<int>(std::floor(u * per_axis)), 0, per_axis - 1);
        idx = idx * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(c);
      }
      out[idx] = 1.0;
    };
    family << "dyadic indicators, " << per_axis << " cells per axis";
  } else {
    basis = [box, per_axis, d](std::span<const double> x, std::span<double> out) {
      std::size_t total = out.size();
      for (std::size_t j = 0; j < total; ++j) {
        std::size_t rest = j;
        double v = 1.0;
        for (int k = d - 1; k >= 0; --k) {
          const int deg = static_cast<int>(rest % static_cast<std::size_t>(per_axis));
          rest /= static_cast<std::size_t>(per_axis);
          v *= legendre(deg, x[k], box.lo[k], box.hi[k]);
        }
        out[j] = v;
      }
    };
    family << "tensor Legendre polynomials, degree < " << per_axis << " per axis";
  }

  const std::size_t M = static_cast<std::size_t>(options.M);
  const std::size_t K = spectrum.size();
  // Family: T (K x M), then the raw basis Gram (M x M).
  FamilyKernel kernel = [&](const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq) {
    const std::size_t N = rule.size();
    std::vector<double> raw(N * M);
    for (std::size_t i = 0; i < N; ++i) basis(rule.nodes[i], {raw.data() + i * M, M});
    std::vector<Complex> v(raw.begin(), raw.end());
    const PointSet y = kernels::map_points(phi, rule.nodes);
    kernels::weighted_transform(y, rule.weights, v, M, spectrum.points, -1.0, sums.subspan(0, K * M));
    for (std::size_t i = 0; i < N; ++i) {
      const double* r = raw.data() + i * M;
      for (std::size_t a = 0; a < M; ++a) {
        if (r[a] == 0.0) continue;
        for (std::size_t b = 0; b < M; ++b) sums[K * M + a * M + b] += rule.weights[i] * r[a] * r[b];
      }
    }
    if (!sum_sq.empty())
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t a = 0; a < M; ++a) {
          const double s = rule.weights[i] * raw[i * M + a] * raw[i * M + a];
          for (std::size_t k = 0; k < K; ++k) sum_sq[k * M + a] += s;
        }
  };
  const FamilyEstimate est = integrate_family(mu, K * M + M * M, kernel, spec);

  // Dyadic cells are normalized by their measured mass; empty cells are dropped.
  Mat G(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = 0; b < M; ++b) G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = est.values[K * M + a * M + b].real();
  std::vector<std::size_t> keep;
  std::vector<double> scale(M, 1.0);
  for (std::size_t a = 0; a < M; ++a) {
    const double g = G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
    if (options.basis == TestBasis::Dyadic) {
      if (g <= 1e-14 * mu.total_mass()) continue;
      scale[a] = 1.0 / std::sqrt(g);
    }
    keep.push_back(a);
  }
  if (keep.empty()) throw DomainError("frame_bounds: no test function has positive norm");
  double dev = 0.0;
  for (std::size_t a : keep)
    for (std::size_t b : keep) {
      const double g = G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * scale[a] * scale[b];
      dev = std::max(dev, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  if (dev > options.orthonormality_tol)
    throw DomainError("frame_bounds: test family is not orthonormal in L^2(mu) (deviation " + std::to_string(dev) + ")");

  CMat T(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(keep.size()));
  double err = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t c = 0; c < keep.size(); ++c) {
      const std::size_t a = keep[c];
      T(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = est.values[k * M + a] * scale[a];
      err = std::max(err, est.errors[k * M + a] * scale[a]);
    }
  Eigen::JacobiSVD<CMat> svd(T);
  const Vec sv = svd.singularValues();

  FrameBoundsReport report;
  report.K = K;
  report.M = static_cast<int>(keep.size());
  report.singular_values.assign(sv.data(), sv.data() + sv.size());
  report.B = sv.size() > 0 ? sv[0] * sv[0] : 0.0;
  report.A = (K >= keep.size() && sv.size() > 0) ? sv[sv.size() - 1] * sv[sv.size() - 1] : 0.0;
  if (keep.size() < M) family << " (" << M - keep.size() << " empty cells dropped)";
  report.test_family = family.str();
  report.orthonormality_dev = dev;
  report.quad_error = err;
  report.quad = est.used;
  report.bias =
      "A is the smallest ratio sum|<f,e_lambda>|^2 / ||f||^2 over the test span, an upper bound for the lower frame "
      "bound up to spectrum truncation; B is a lower bound for the upper frame bound";
  return report;
}

}  // namespace nlphase
