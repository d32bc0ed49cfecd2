#include "nlphase/gram.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "nlphase/kernels.hpp"

namespace nlphase {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<long long>& k) const {
    std::size_t h = 0x9E3779B97F4A7C15ULL;
    for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001B3ULL + (h >> 29);
    return h;
  }
};

// Differences are keyed on a 2^-32 grid, so coincident differences share one integral.
std::vector<long long> difference_key(std::span<const double> a, std::span<const double> b) {
  std::vector<long long> key(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) key[k] = std::llround(std::ldexp(a[k] - b[k], 32));
  return key;
}

Vec rescaled(const Box& box, std::span<const double> x) {
  Vec u(box.dim());
  for (int k = 0; k < box.dim(); ++k) u[k] = std::clamp((x[k] - box.lo[k]) / (box.hi[k] - box.lo[k]), 0.0, 1.0);
  return u;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

GramReport gram(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum, const QuadratureSpec& quad,
                const GramOptions& options) {
  if (phi.in_dim() != mu.dim()) throw DomainError("gram: phase expects dimension " + std::to_string(phi.in_dim()) +
                                                  ", measure has " + std::to_string(mu.dim()));
  if (phi.out_dim() != spectrum.dim()) throw DomainError("gram: spectrum dimension does not match the phase range");
  const std::size_t n = spectrum.size();
  if (n == 0) throw DomainError("gram: empty spectrum");
  if (n > options.max_points)
    throw DomainError("gram: spectrum has " + std::to_string(n) + " points, cap is " + std::to_string(options.max_points));

  GramReport report;
  report.n = n;
  report.total_mass = mu.total_mass();
  report.quad = quad;

  std::unordered_map<std::vector<long long>, std::size_t, KeyHash> index;
  std::vector<std::size_t> entry(n * n);
  PointSet deltas;
  deltas.dim = spectrum.dim();
  std::vector<double> delta(static_cast<std::size_t>(spectrum.dim()));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      auto key = difference_key(spectrum.points[a], spectrum.points[b]);
      auto [it, inserted] = index.try_emplace(std::move(key), deltas.size());
      if (inserted) {
        for (int k = 0; k < spectrum.dim(); ++k) delta[static_cast<std::size_t>(k)] = spectrum.points[a][k] - spectrum.points[b][k];
        deltas.push_back(delta);
      } else {
        ++report.cache_hits;
      }
      entry[a * n + b] = it->second;
    }
  const std::size_t m = deltas.size();
  report.distinct_differences = m;

  std::vector<Complex> values(m);
  std::vector<double> errors(m, 0.0);
  std::optional<KnownPushforward> known;
  if (options.product_formula && phi.out_dim() == 1) known = known_pushforward(mu, phi);
  if (known) {
    require_product_formula(known->measure);
    const SelfSimilar& s = known->measure;
    const int levels = std::min(options.trunc, known->levels);
    double dmax = 0.0;
    for (double dj : s.digits) dmax = std::max(dmax, std::abs(dj));
    for (std::size_t k = 0; k < m; ++k) {
      const double xi = deltas[k][0];
      values[k] = report.total_mass * self_similar_product(s, xi, levels);
      // Tail of the infinite product beyond the factors used.
      errors[k] = report.total_mass * kTwoPi * std::abs(xi) * dmax * std::pow(s.ratio, -levels) / (s.ratio - 1.0);
    }
    report.method = "product_formula";
  } else {
    double ymax = 0.0;
    std::mutex ymax_mutex;
    FamilyKernel kernel = [&](const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq) {
      const PointSet y = kernels::map_points(phi, rule.nodes);
      double local = 0.0;
      for (double c : y.coords) local = std::max(local, std::abs(c));
      {
        std::lock_guard lock(ymax_mutex);
        ymax = std::max(ymax, local);
      }
      kernels::exp_sums(y, rule.weights, deltas, 1.0, sums);
      if (!sum_sq.empty()) {
        const double w = rule.total_weight();
        for (double& s : sum_sq) s += w;
      }
    };
    FamilyEstimate est = integrate_family(mu, m, kernel, quad);
    values = std::move(est.values);
    errors = std::move(est.errors);
    // Floor from rounding in the phase arguments.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k < m; ++k) {
      double l1 = 0.0;
      for (int c = 0; c < deltas.dim; ++c) l1 += std::abs(deltas[k][c]);
      errors[k] = std::max(errors[k], 8.0 * eps * report.total_mass * (1.0 + kTwoPi * l1 * ymax));
    }
    report.nodes = est.nodes;
    report.quad = est.used;
    report.method = "quadrature";
  }

  report.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) report.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = values[entry[a * n + b]];
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const Complex g = report.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (a == b) {
        report.diag_dev = std::max(report.diag_dev, std::abs(g - report.total_mass));
      } else {
        report.max_offdiag = std::max(report.max_offdiag, std::abs(g));
      }
      const Complex gt = report.entries(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
      report.hermiticity = std::max(report.hermiticity, std::abs(g - std::conj(gt)));
    }
  for (double e : errors) report.quad_error = std::max(report.quad_error, e);
  report.entry_errors = std::move(errors);
  return report;
}

// ---------------------------------------------------------------------------------------------

std::vector<TestFunction> default_battery(const Measure& mu) {
  const Box box = mu.support_box();
  const int d = mu.dim();
  std::function<double(std::span<const double>)> bubble;
  if (const auto* disc = mu.as_disc()) {
    const Vec c = disc->center;
    const double r2 = disc->radius * disc->radius;
    bubble = [c, r2](std::span<const double> x) {
      const double dx = x[0] - c[0];
      const double dy = x[1] - c[1];
      return std::max(0.0, 1.0 - (dx * dx + dy * dy) / r2);
    };
  } else {
    bubble = [box](std::span<const double> x) {
      const Vec u = rescaled(box, x);
      double b = 1.0;
      for (Eigen::Index k = 0; k < u.size(); ++k) b *= 4.0 * u[k] * (1.0 - u[k]);
      return b;
    };
  }
  return {
      {"one", [](std::span<const double>) { return Complex{1.0, 0.0}; }},
      {"bubble", [bubble](std::span<const double> x) { return Complex{bubble(x), 0.0}; }},
      {"bubble^2",
       [bubble](std::span<const double> x) {
         const double b = bubble(x);
         return Complex{b * b, 0.0};
       }},
      {"bubble*cos",
       [bubble, box, d](std::span<const double> x) {
         const Vec u = rescaled(box, x);
         return Complex{bubble(x) * std::cos(kTwoPi * u[d - 1]), 0.0};
       }},
  };
}

std::vector<TestFunction> extended_battery(const Measure& mu) {
  const Box box = mu.support_box();
  std::vector<TestFunction> out;
  for (int p = 1; p <= 4; ++p)
    out.push_back({"u1^" + std::to_string(p), [box, p](std::span<const double> x) {
                     return Complex{std::pow(rescaled(box, x)[0], p), 0.0};
                   }});
  out.push_back({"indicator(u1<1/2)", [box](std::span<const double> x) {
                   return Complex{rescaled(box, x)[0] < 0.5 ? 1.0 : 0.0, 0.0};
                 }});
  out.push_back({"cos(2 pi u1)", [box](std::span<const double> x) {
                   return Complex{std::cos(kTwoPi * rescaled(box, x)[0]), 0.0};
                 }});
  return out;
}

OnbReport verify_onb(const Measure& mu, const PhaseMap& phi, const SpectrumSet& spectrum, const QuadratureSpec& quad,
                     const std::vector<TestFunction>& tests, const VerifyOptions& options) {
  if (tests.empty()) throw DomainError("verify_onb: need at least one test function");
  OnbReport report;
  report.gram = gram(mu, phi, spectrum, quad, options.gram);
  report.orthogonal = report.gram.max_offdiag <= options.tol_orth && report.gram.diag_dev <= options.tol_orth;

  const std::size_t n = spectrum.size();
  const std::size_t J = tests.size();
  // Family: c[lambda][j] for all pairs, then ||f_j||^2.
  FamilyKernel kernel = [&](const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq) {
    const std::size_t N = rule.size();
    std::vector<Complex> v(N * J);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < J; ++j) v[i * J + j] = tests[j].fn(rule.nodes[i]);
    const PointSet y = kernels::map_points(phi, rule.nodes);
    kernels::weighted_transform(y, rule.weights, v, J, spectrum.points, -1.0, sums.subspan(0, n * J));
    for (std::size_t j = 0; j < J; ++j) {
      double s = 0.0;
      double q = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double a = std::norm(v[i * J + j]);
        s += rule.weights[i] * a;
        q += rule.weights[i] * a * a;
      }
      sums[n * J + j] += s;
      if (!sum_sq.empty()) {
        sum_sq[n * J + j] += q;
        for (std::size_t k = 0; k < n; ++k) sum_sq[k * J + j] += s;
      }
    }
  };
  const FamilyEstimate est = integrate_family(mu, n * J + J, kernel, quad, false);
  report.coefficient_error = est.max_error();
  for (std::size_t j = 0; j < J; ++j) {
    ParsevalRow row;
    row.name = tests[j].name;
    row.norm2 = est.values[n * J + j].real();
    double energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = report.gram.entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
      energy += std::norm(est.values[k * J + j]) / g;
    }
    row.ratio = row.norm2 > 0.0 ? energy / row.norm2 : std::numeric_limits<double>::quiet_NaN();
    report.parseval.push_back(row);
  }

  if (!report.orthogonal) {
    report.verdict = Verdict::Fail;
    report.reason = "orthogonality: max_offdiag " + fmt(report.gram.max_offdiag) + ", diag_dev " +
                    fmt(report.gram.diag_dev) + " vs tol " + fmt(options.tol_orth);
    return report;
  }
  bool low = false;
  for (const ParsevalRow& row : report.parseval) {
    if (!(row.ratio <= 1.0 + options.tol_c)) {
      report.bessel_violation = true;
      report.verdict = Verdict::Fail;
      report.reason = "Bessel inequality violated by '" + row.name + "' (ratio " + fmt(row.ratio) +
                      "); the quadrature is not accurate enough for this spectrum";
      return report;
    }
    if (row.ratio < 1.0 - options.tol_c) low = true;
  }
  if (low) {
    report.verdict = Verdict::Inconclusive;
    report.reason = "orthogonal, but some Parseval ratios are below 1 - tol_c (possibly spectrum truncation)";
  } else {
    report.verdict = Verdict::Pass;
    report.reason = "orthogonal and all Parseval ratios within tol_c";
  }
  return report;
}

UnimodularReport unimodular_conjugation_check(const Measure& mu, const PhaseMap& phi, const Mat& M, double radius,
                                              const QuadratureSpec& quad, const GramOptions& options) {
  const int d = phi.out_dim();
  if (M.rows() != d || M.cols() != d) throw DomainError("unimodular check: M must be d x d");
  for (Eigen::Index i = 0; i < M.size(); ++i)
    if (M.data()[i] != std::round(M.data()[i])) throw DomainError("unimodular check: M must have integer entries");
  if (std::abs(std::abs(M.determinant()) - 1.0) > 1e-9) throw DomainError("unimodular check: |det M| must be 1");
  const SpectrumSet Z = lattice(Mat::Identity(d, d), radius);
  if (Z.size() < 2) throw DomainError("unimodular check: truncation too small to compare any pair");
  PointSet image(d, Z.size());
  for (std::size_t i = 0; i < Z.size(); ++i) {
    const Vec k = M.transpose() * Z.points.point(i);
    for (int c = 0; c < d; ++c) image[i][c] = k[c];
  }
  const GramReport conjugated = gram(mu, PhaseMap::compose(PhaseMap::affine(M, Vec::Zero(d)), phi), Z, quad, options);
  const GramReport direct = gram(mu, phi, explicit_spectrum(std::move(image)), quad, options);
  UnimodularReport report;
  report.max_deviation = (conjugated.entries - direct.entries).cwiseAbs().maxCoeff();
  report.quad_error = std::max(conjugated.quad_error, direct.quad_error);
  report.pairs = Z.size() * Z.size();
  return report;
}

}  // namespace nlphase
