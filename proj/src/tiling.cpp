#include "nlphase/tiling.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>

#include "nlphase/kernels.hpp"
#include "nlphase/measure.hpp"

namespace nlphase {

namespace {

bool in_half_open(const Box& box, const Vec& x) {
  for (int k = 0; k < box.dim(); ++k)
    if (!(x[k] >= box.lo[k] && x[k] < box.hi[k])) return false;
  return true;
}

bool invertible(const PhaseMap& phi) {
  switch (phi.kind()) {
    case PhaseMap::Kind::Identity:
    case PhaseMap::Kind::Unipotent:
    case PhaseMap::Kind::Triangular2D: return true;
    case PhaseMap::Kind::Affine: return phi.in_dim() == phi.out_dim();
    case PhaseMap::Kind::Composite: {
      const auto& c = *phi.as_composite();
      return c.outer.kind() == PhaseMap::Kind::Affine && invertible(c.outer) && invertible(c.inner);
    }
    default: return false;
  }
}

// Preimage of y under phi restricted to the box; nullopt when y is not in phi(box).
std::optional<Vec> preimage(const PhaseMap& phi, const Vec& y, const Box& box) {
  switch (phi.kind()) {
    case PhaseMap::Kind::Identity: return y;
    case PhaseMap::Kind::Affine: {
      const auto& p = *phi.as_affine();
      return Vec(p.M.partialPivLu().solve(y - p.b));
    }
    case PhaseMap::Kind::Unipotent: {
      const auto& p = *phi.as_unipotent();
      Vec x = y;
      for (int k = p.dim - 2; k >= 0; --k) x[k] = y[k] - p.l[static_cast<std::size_t>(k)](as_span(x));
      return x;
    }
    case PhaseMap::Kind::Triangular2D: {
      const auto& p = *phi.as_triangular2d();
      const auto x2 = phi.triangular_second_inverse(y[1], box.lo[1], box.hi[1]);
      if (!x2) return std::nullopt;
      Vec x(2);
      x << (y[0] - p.f(*x2)) / p.z(*x2), *x2;
      return x;
    }
    case PhaseMap::Kind::Composite: {
      const auto& c = *phi.as_composite();
      const auto mid = preimage(c.outer, y, box);
      if (!mid) return std::nullopt;
      return preimage(c.inner, *mid, box);
    }
    default: throw DomainError("no analytic inverse for " + phi.name());
  }
}

// Occupancy grid of phi(box) on 256^d cells, dilated by one cell.
class Occupancy {
public:
  static constexpr int kCells = 256;

  Occupancy(const PhaseMap& phi, const Box& box) : dim_(phi.out_dim()) {
    if (phi.in_dim() != 2 || dim_ != 2) throw DomainError("occupancy grid supports planar maps only");
    const int per_axis = 4 * kCells;
    PointSet xs(2, static_cast<std::size_t>(per_axis) * per_axis);
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j) {
        auto p = xs[static_cast<std::size_t>(i) * per_axis + j];
        p[0] = box.lo[0] + (i + 0.5) / per_axis * (box.hi[0] - box.lo[0]);
        p[1] = box.lo[1] + (j + 0.5) / per_axis * (box.hi[1] - box.lo[1]);
      }
    const PointSet ys = kernels::map_points(phi, xs);
    lo_ = Vec::Constant(2, std::numeric_limits<double>::infinity());
    hi_ = -lo_;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      lo_ = lo_.cwiseMin(ys.point(i));
      hi_ = hi_.cwiseMax(ys.point(i));
    }
    std::vector<char> raw(kCells * kCells, 0);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const auto c = cell(ys.point(i));
      if (c) raw[static_cast<std::size_t>(*c)] = 1;
    }
    marked_.assign(raw.size(), 0);
    for (int a = 0; a < kCells; ++a)
      for (int b = 0; b < kCells; ++b) {
        if (!raw[static_cast<std::size_t>(a * kCells + b)]) continue;
        for (int da = -1; da <= 1; ++da)
          for (int db = -1; db <= 1; ++db) {
            const int aa = a + da;
            const int bb = b + db;
            if (aa >= 0 && aa < kCells && bb >= 0 && bb < kCells) marked_[static_cast<std::size_t>(aa * kCells + bb)] = 1;
          }
      }
  }

  bool contains(const Vec& y) const {
    const auto c = cell(y);
    return c && marked_[static_cast<std::size_t>(*c)];
  }

private:
  std::optional<int> cell(const Vec& y) const {
    int idx = 0;
    for (int k = 0; k < dim_; ++k) {
      const double u = (y[k] - lo_[k]) / (hi_[k] - lo_[k]);
      if (!(u >= 0.0 && u <= 1.0)) return std::nullopt;
      idx = idx * kCells + std::min(kCells - 1, static_cast<int>(u * kCells));
    }
    return idx;
  }

  int dim_;
  Vec lo_;
  Vec hi_;
  std::vector<char> marked_;
};

struct OverlapSamples {
  PointSet xs;
  PointSet ys;
  std::vector<double> dets;
};

OverlapSamples draw(const PhaseMap& phi, const Box& box, std::size_t n, std::uint64_t seed) {
  OverlapSamples s;
  s.xs = sample(Measure::lebesgue_box(box.lo, box.hi), n, seed);
  s.ys = kernels::map_points(phi, s.xs);
  s.dets.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.dets[i] = std::abs(phi.jacobian(s.xs.point(i)).determinant());
  return s;
}

OverlapReport overlap_from(const PhaseMap& phi, const Box& box, const Vec& k, const OverlapSamples& s,
                           const Occupancy* grid) {
  OverlapReport r;
  r.k = k;
  r.n = s.xs.size();
  r.method = grid ? "occupancy grid" : "analytic inverse";
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const Vec y = s.ys.point(i) + k;
    bool inside = false;
    if (grid) {
      inside = grid->contains(y);
    } else {
      try {
        const auto x = preimage(phi, y, box);
        if (x && x->allFinite()) inside = in_half_open(box, *x);
        else if (x) ++r.failures;
      } catch (const DomainError&) {
        ++r.failures;
      } catch (const QuadratureError&) {
        ++r.failures;
      }
    }
    const double v = inside ? s.dets[i] : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double vol = box.volume();
  const double n = static_cast<double>(r.n);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
  r.volume = vol * mean;
  r.std_err = vol * std::sqrt(var / n);
  r.valid = static_cast<double>(r.failures) <= 0.01 * n;
  return r;
}

}  // namespace

HistogramReport frac_histogram_test(const PhaseMap& phi, const Box& box, const Mat& A, std::size_t n, int bins_per_axis,
                                    std::uint64_t seed) {
  const int d = phi.out_dim();
  if (A.rows() != d || A.cols() != d) throw DomainError("frac_histogram_test: lattice matrix must be d x d");
  if (bins_per_axis < 1) throw DomainError("frac_histogram_test: bins must be >= 1");
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(bins_per_axis);
  if (n < 10 * total) throw DomainError("frac_histogram_test: need n >= 10 * bins (" + std::to_string(10 * total) + ")");
  const Mat Ainv = A.fullPivLu().inverse();
  const PointSet xs = sample(Measure::lebesgue_box(box.lo, box.hi), n, seed);
  PointSet us = kernels::map_points(phi, xs);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec u = Ainv * us.point(i);
    for (int k = 0; k < d; ++k) us[i][k] = u[k] - std::floor(u[k]);
  }
  HistogramReport h;
  h.counts = kernels::histogram(us, bins_per_axis);
  h.n = n;
  h.bins_per_axis = bins_per_axis;
  const double expected = static_cast<double>(n) / static_cast<double>(total);
  for (std::uint64_t c : h.counts) {
    const double diff = static_cast<double>(c) - expected;
    h.chi2 += diff * diff / expected;
    if (c == 0) ++h.empty_bins;
  }
  h.dof = static_cast<int>(total) - 1;
  if (h.dof < 1) throw DomainError("frac_histogram_test: need at least two bins");
  const boost::math::chi_squared dist(h.dof);
  h.q99 = boost::math::quantile(dist, 0.99);
  h.q9999 = boost::math::quantile(dist, 0.9999);
  h.verdict = h.chi2 < h.q99 ? "UNIFORM" : (h.chi2 > h.q9999 ? "NONUNIFORM" : "INCONCLUSIVE");
  h.covolume_matches = std::abs(std::abs(A.determinant()) - box.volume()) <= 1e-9 * box.volume();
  return h;
}

void write_histogram_csv(const HistogramReport& h, int dim, std::ostream& os) {
  for (int k = 0; k < dim; ++k) os << "u" << k + 1 << ",";
  os << "count\n";
  const int b = h.bins_per_axis;
  for (std::size_t idx = 0; idx < h.counts.size(); ++idx) {
    std::vector<int> cell(static_cast<std::size_t>(dim));
    std::size_t rest = idx;
    for (int k = dim - 1; k >= 0; --k) {
      cell[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(b));
      rest /= static_cast<std::size_t>(b);
    }
    for (int k = 0; k < dim; ++k) os << (cell[static_cast<std::size_t>(k)] + 0.5) / b << ",";
    os << h.counts[idx] << "\n";
  }
}

OverlapReport overlap_volume(const PhaseMap& phi, const Box& box, const Vec& k, std::size_t n, std::uint64_t seed) {
  if (phi.in_dim() != box.dim() || phi.out_dim() != k.size()) throw DomainError("overlap_volume: dimension mismatch");
  if (n < 2) throw DomainError("overlap_volume: need at least two samples");
  const OverlapSamples s = draw(phi, box, n, seed);
  if (invertible(phi)) return overlap_from(phi, box, k, s, nullptr);
  const Occupancy grid(phi, box);
  return overlap_from(phi, box, k, s, &grid);
}

TilingReport tiling_verdict(const PhaseMap& phi, const Box& box, const Mat& A, const TilingConfig& config) {
  const int d = phi.out_dim();
  if (phi.in_dim() != box.dim() || A.rows() != d || A.cols() != d) throw DomainError("tiling_verdict: dimension mismatch");
  TilingReport report;
  report.det_A = std::abs(A.determinant());

  const OverlapSamples s = draw(phi, box, config.overlap_samples, config.seed);
  std::optional<Occupancy> grid;
  if (!invertible(phi)) grid.emplace(phi, box);

  // Image volume int_B |det J|.
  {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : s.dets) {
      sum += v;
      sum_sq += v * v;
    }
    const double n = static_cast<double>(s.dets.size());
    const double mean = sum / n;
    report.image_volume = box.volume() * mean;
    report.image_volume_err = box.volume() * std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / std::max(1.0, n - 1.0));
    report.volume_match = std::abs(report.image_volume - report.det_A) <=
                          std::max(3.0 * report.image_volume_err, config.volume_tol * report.det_A);
  }

  bool any_positive = false;
  bool any_invalid = false;
  std::vector<long long> j(static_cast<std::size_t>(d), -config.radius);
  while (true) {
    bool zero = true;
    for (long long v : j) zero = zero && v == 0;
    if (!zero) {
      Vec jv(d);
      for (int c = 0; c < d; ++c) jv[c] = static_cast<double>(j[static_cast<std::size_t>(c)]);
      OverlapReport o = overlap_from(phi, box, A * jv, s, grid ? &*grid : nullptr);
      if (!o.valid) any_invalid = true;
      else if (o.volume > 3.0 * o.std_err && o.volume > 0.0) any_positive = true;
      report.overlaps.push_back(std::move(o));
    }
    int c = d - 1;
    while (c >= 0 && ++j[static_cast<std::size_t>(c)] > config.radius) {
      j[static_cast<std::size_t>(c)] = -config.radius;
      --c;
    }
    if (c < 0) break;
  }
  report.packing = any_positive ? Verdict::Fail : (any_invalid ? Verdict::Inconclusive : Verdict::Pass);

  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= static_cast<std::size_t>(config.bins_per_axis);
  const std::size_t hist_n = std::max(config.histogram_samples, 10 * total);
  report.histogram = frac_histogram_test(phi, box, A, hist_n, config.bins_per_axis, config.seed + 1);

  if (report.packing == Verdict::Pass && report.volume_match) report.tiling = "TILES";
  else if (report.packing == Verdict::Fail || !report.volume_match) report.tiling = "NOT-TILING";
  else report.tiling = "INCONCLUSIVE";
  return report;
}

}  // namespace nlphase
