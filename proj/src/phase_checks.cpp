#include "nlphase/phase_checks.hpp"

#include <cmath>
#include <unordered_map>

#include "nlphase/kernels.hpp"

namespace nlphase {

PreservationReport measure_preservation_check(const PhaseMap& phi, const Measure& domain, std::size_t n, double tol,
                                              std::uint64_t seed, double exclusion_band, double h) {
  if (phi.in_dim() != domain.dim() || phi.in_dim() != phi.out_dim())
    throw DomainError("measure_preservation_check: need a square map on the domain's dimension");
  const PointSet xs = sample(domain, n, seed);
  PreservationReport report;
  report.tol = tol;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vec x = xs.point(i);
    if (exclusion_band > 0.0 && phi.singular_distance(x) < exclusion_band) {
      ++report.excluded;
      continue;
    }
    const double det = std::abs(phi.jacobian(x, h).determinant());
    report.max_dev = std::max(report.max_dev, std::abs(det - 1.0));
    ++report.points_checked;
  }
  report.excluded_fraction = static_cast<double>(report.excluded) / static_cast<double>(xs.size());
  report.pass = report.points_checked > 0 && report.max_dev <= tol;
  return report;
}

namespace {

struct CellHash {
  std::size_t operator()(const std::vector<long long>& k) const {
    std::size_t h = 1469598103934665603ULL;
    for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ULL;
    return h;
  }
};

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

CollisionReport essential_injectivity_probe(const PhaseMap& phi, const Measure& mu, std::size_t n,
                                            std::optional<double> delta_x, std::optional<double> delta_y,
                                            std::uint64_t seed, std::size_t max_stored) {
  if (n < 100) throw DomainError("essential_injectivity_probe: need at least 100 samples to populate the hash grid");
  if (phi.in_dim() != mu.dim()) throw DomainError("essential_injectivity_probe: dimension mismatch");
  const PointSet xs = sample(mu, n, seed);
  const PointSet ys = kernels::map_points(phi, xs);
  const int dy = ys.dim;

  CollisionReport report;
  report.n_samples = n;
  report.delta_x = delta_x.value_or(0.05 * mu.support_box().diameter());
  if (delta_y) {
    report.delta_y = *delta_y;
  } else {
    Vec lo = ys.point(0);
    Vec hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = lo.cwiseMin(ys.point(i));
      hi = hi.cwiseMax(ys.point(i));
    }
    report.delta_y = 1e-4 * (hi - lo).norm();
  }
  if (!(report.delta_x > 0.0) || !(report.delta_y > 0.0)) throw DomainError("essential_injectivity_probe: thresholds must be positive");

  std::unordered_map<std::vector<long long>, std::vector<std::size_t>, CellHash> grid;
  std::vector<std::vector<long long>> keys(n, std::vector<long long>(static_cast<std::size_t>(dy)));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dy; ++k) keys[i][static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(ys[i][k] / report.delta_y));
    grid[keys[i]].push_back(i);
  }
  std::vector<char> colliding(n, 0);
  std::vector<long long> probe(static_cast<std::size_t>(dy));
  std::size_t neighbours = 1;
  for (int k = 0; k < dy; ++k) neighbours *= 3;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < neighbours; ++c) {
      std::size_t rest = c;
      for (int k = 0; k < dy; ++k) {
        probe[static_cast<std::size_t>(k)] = keys[i][static_cast<std::size_t>(k)] + static_cast<long long>(rest % 3) - 1;
        rest /= 3;
      }
      auto it = grid.find(probe);
      if (it == grid.end()) continue;
      for (std::size_t j : it->second) {
        if (j <= i) continue;
        if (distance(ys[i], ys[j]) < report.delta_y && distance(xs[i], xs[j]) > report.delta_x) {
          ++report.pair_count;
          colliding[i] = colliding[j] = 1;
          if (report.collisions.size() < max_stored) report.collisions.emplace_back(xs.point(i), xs.point(j));
        }
      }
    }
  }
  for (char c : colliding) report.colliding_samples += static_cast<std::size_t>(c);
  report.collision_fraction = static_cast<double>(report.colliding_samples) / static_cast<double>(n);
  return report;
}

}  // namespace nlphase
