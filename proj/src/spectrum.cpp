#include "nlphase/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nlphase/rng.hpp"

namespace nlphase {

namespace {

constexpr std::size_t kMaxEnumeration = std::size_t{1} << 26;

Mat checked_inverse(const Mat& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() == 0) throw DomainError(std::string(who) + ": matrix must be square");
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
    throw DomainError(std::string(who) + ": singular matrix");
  return lu.inverse();
}

// Calls visit(n) for every integer vector n in the box [lo, hi] (inclusive), lexicographically.
template <class Visit>
void for_each_integer(const std::vector<long long>& lo, const std::vector<long long>& hi, Visit&& visit) {
  const std::size_t d = lo.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (hi[k] < lo[k]) return;
    total *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
    if (total > kMaxEnumeration) throw DomainError("lattice enumeration too large; reduce the radius or window");
  }
  std::vector<long long> n = lo;
  while (true) {
    visit(n);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++n[k] <= hi[k]) break;
      n[k] = lo[k];
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

std::vector<long long> lambda4_values(int n) {
  std::vector<long long> v = {0};
  long long p = 1;
  for (int i = 0; i < n; ++i) {
    const std::size_t size = v.size();
    for (std::size_t j = 0; j < size; ++j) v.push_back(v[j] + p);
    p *= 4;
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::string SpectrumSet::describe() const {
  std::ostringstream os;
  if (const auto* l = std::get_if<LatticeGenerator>(&generator)) {
    os << "lattice(d=" << l->A.rows() << ", |det A|=" << std::abs(l->A.determinant()) << ", radius " << l->radius << ")";
  } else if (const auto* g = std::get_if<Lambda4Generator>(&generator)) {
    os << "lambda4(n=" << g->level << ")";
  } else {
    os << "explicit";
  }
  os << ", " << size() << " points";
  return os.str();
}

SpectrumSet lattice(const Mat& A, double radius) {
  if (!(radius >= 0.0)) throw DomainError("lattice: radius must be >= 0");
  const Mat Ainv = checked_inverse(A, "lattice");
  const int d = static_cast<int>(A.rows());
  const double norm_inv = Ainv.cwiseAbs().rowwise().sum().maxCoeff();
  const long long bound = static_cast<long long>(std::ceil(norm_inv * radius + 1e-9));
  std::vector<long long> lo(static_cast<std::size_t>(d), -bound);
  std::vector<long long> hi(static_cast<std::size_t>(d), bound);
  SpectrumSet s;
  s.points.dim = d;
  s.generator = LatticeGenerator{A, radius};
  Vec n(d);
  const double slack = 1e-9 * std::max(1.0, radius);
  for_each_integer(lo, hi, [&](const std::vector<long long>& idx) {
    for (int k = 0; k < d; ++k) n[k] = static_cast<double>(idx[static_cast<std::size_t>(k)]);
    const Vec p = A * n;
    if (p.cwiseAbs().maxCoeff() <= radius + slack) s.points.push_back(as_span(p));
  });
  return s;
}

Mat dual_lattice(const Mat& A) { return checked_inverse(A, "dual_lattice").transpose(); }

SpectrumSet lambda4(int n) {
  if (n < 1 || n > 16) throw DomainError("lambda4: level must be in [1, 16]");
  SpectrumSet s;
  s.points.dim = 1;
  s.generator = Lambda4Generator{n};
  for (long long v : lambda4_values(n)) s.points.coords.push_back(static_cast<double>(v));
  return s;
}

SpectrumSet explicit_spectrum(PointSet points) {
  if (points.dim < 1) throw DomainError("explicit spectrum: dimension must be >= 1");
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto p = points[i];
    if (!seen.insert(std::vector<double>(p.begin(), p.end())).second)
      throw DomainError("explicit spectrum: points must be pairwise distinct");
  }
  SpectrumSet s;
  s.points = std::move(points);
  s.generator = ExplicitGenerator{};
  return s;
}

SpectrumSet embed(const SpectrumSet& s, int dim, const std::vector<int>& axes) {
  if (static_cast<int>(axes.size()) != s.dim()) throw DomainError("embed: need one axis per spectrum coordinate");
  for (int a : axes)
    if (a < 0 || a >= dim) throw DomainError("embed: axis out of range");
  PointSet pts(dim, s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = 0; k < axes.size(); ++k) pts[i][static_cast<std::size_t>(axes[k])] = s.points[i][k];
  SpectrumSet out;
  out.points = std::move(pts);
  out.generator = ExplicitGenerator{};
  return out;
}

std::size_t count_in_window(const SpectrumSet& s, const Vec& lo, const Vec& hi) {
  const int d = s.dim();
  if (lo.size() != d || hi.size() != d) throw DomainError("count_in_window: window dimension mismatch");
  auto inside = [&](std::span<const double> p) {
    for (int k = 0; k < d; ++k)
      if (!(p[k] >= lo[k] && p[k] < hi[k])) return false;
    return true;
  };
  if (const auto* l = std::get_if<LatticeGenerator>(&s.generator)) {
    const Mat Ainv = checked_inverse(l->A, "count_in_window");
    const Vec c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo).maxCoeff();
    const Vec nc = Ainv * c;
    const double reach = Ainv.cwiseAbs().rowwise().sum().maxCoeff() * h + 1.0;
    std::vector<long long> a(static_cast<std::size_t>(d));
    std::vector<long long> b(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      a[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(nc[k] - reach));
      b[static_cast<std::size_t>(k)] = static_cast<long long>(std::ceil(nc[k] + reach));
    }
    std::size_t count = 0;
    Vec n(d);
    for_each_integer(a, b, [&](const std::vector<long long>& idx) {
      for (int k = 0; k < d; ++k) n[k] = static_cast<double>(idx[static_cast<std::size_t>(k)]);
      const Vec p = l->A * n;
      if (inside(as_span(p))) ++count;
    });
    return count;
  }
  if (std::holds_alternative<Lambda4Generator>(s.generator)) {
    int level = 1;
    while ((std::pow(4.0, level) - 1.0) / 3.0 < hi[0]) {
      if (++level > 24) throw DomainError("count_in_window: window beyond the enumerable range of lambda4");
    }
    std::size_t count = 0;
    for (long long v : lambda4_values(level))
      if (static_cast<double>(v) >= lo[0] && static_cast<double>(v) < hi[0]) ++count;
    return count;
  }
  if (s.size() == 0) throw DomainError("count_in_window: empty explicit set");
  for (int k = 0; k < d; ++k) {
    double mn = s.points[0][k];
    double mx = mn;
    for (std::size_t i = 1; i < s.size(); ++i) {
      mn = std::min(mn, s.points[i][k]);
      mx = std::max(mx, s.points[i][k]);
    }
    if (lo[k] < mn || hi[k] > mx) throw DomainError("count_in_window: window exceeds the range of the explicit set");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (inside(s.points[i])) ++count;
  return count;
}

DensityReport beurling_density(const SpectrumSet& s, const std::vector<double>& radii, std::size_t n_centers,
                               double center_range, std::uint64_t seed) {
  if (radii.empty()) throw DomainError("beurling_density: need at least one window size");
  const int d = s.dim();
  std::vector<Vec> centers = {Vec::Zero(d)};
  CounterRng rng = split_stream(seed, 0);
  for (std::size_t i = 0; i < n_centers; ++i) {
    Vec c(d);
    for (int k = 0; k < d; ++k) c[k] = rng.uniform(-center_range, center_range);
    centers.push_back(c);
  }
  DensityReport report;
  report.centers = centers.size();
  for (double R : radii) {
    if (!(R > 0.0)) throw DomainError("beurling_density: window sizes must be positive");
    DensityRow row{R, 0.0, std::numeric_limits<double>::infinity()};
    const double volume = std::pow(R, d);
    for (const Vec& c : centers) {
      const Vec half = Vec::Constant(d, 0.5 * R);
      const double density = static_cast<double>(count_in_window(s, c - half, c + half)) / volume;
      row.d_plus = std::max(row.d_plus, density);
      row.d_minus = std::min(row.d_minus, density);
    }
    report.rows.push_back(row);
  }
  if (const auto* l = std::get_if<LatticeGenerator>(&s.generator)) {
    std::ostringstream os;
    os << "lattice density 1/|det A| = " << 1.0 / std::abs(l->A.determinant());
    report.verdict = os.str();
  } else {
    bool decreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
      if (report.rows[i].d_minus > report.rows[i - 1].d_minus) decreasing = false;
    report.verdict = decreasing ? "lower estimates non-increasing in R" : "lower estimates not monotone in R";
  }
  return report;
}

}  // namespace nlphase
