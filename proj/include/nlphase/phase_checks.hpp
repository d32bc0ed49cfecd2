#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nlphase/measure.hpp"
#include "nlphase/phase_map.hpp"

namespace nlphase {

struct PreservationReport {
  double max_dev = 0.0;  // max | |det J| - 1 |
  std::size_t points_checked = 0;
  std::size_t excluded = 0;  // samples inside the exclusion band
  double excluded_fraction = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Samples n points of `domain`, skips those within `exclusion_band` of the map's non-smooth
/// locus, and reports the largest deviation of |det J| from 1.
PreservationReport measure_preservation_check(const PhaseMap& phi, const Measure& domain, std::size_t n, double tol,
                                              std::uint64_t seed, double exclusion_band = 0.0, double h = 1e-5);

struct CollisionReport {
  std::size_t n_samples = 0;
  std::vector<std::pair<Vec, Vec>> collisions;  // stored pairs (capped)
  std::size_t pair_count = 0;                   // all pairs found
  std::size_t colliding_samples = 0;
  double collision_fraction = 0.0;  // colliding_samples / n_samples
  double delta_x = 0.0;
  double delta_y = 0.0;
};

/// Looks for sample pairs with |x - x'| > delta_x and |phi(x) - phi(x')| < delta_y using a
/// spatial hash on phi values. Finding none is evidence of essential injectivity, never proof.
/// Defaults: delta_x = 0.05 diam(support), delta_y = 1e-4 diam(bounding box of the images).
/// If a Lipschitz bound L is known, choose delta_x > L delta_y.
CollisionReport essential_injectivity_probe(const PhaseMap& phi, const Measure& mu, std::size_t n,
                                            std::optional<double> delta_x, std::optional<double> delta_y,
                                            std::uint64_t seed, std::size_t max_stored = 1000);

}  // namespace nlphase
