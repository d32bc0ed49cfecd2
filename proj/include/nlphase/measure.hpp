#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlphase/phase_map.hpp"
#include "nlphase/quadrature.hpp"
#include "nlphase/types.hpp"

namespace nlphase {

struct LebesgueBox {
  Vec lo;
  Vec hi;
};

struct LebesgueDisc {
  Vec center;
  double radius = 1.0;
};

/// The invariant probability measure of x -> (x + d_j) / ratio chosen with probability w_j.
/// `depth` is the number of digits drawn by the sampler.
struct SelfSimilar {
  int ratio = 4;
  std::vector<double> digits;
  std::vector<double> weights;
  int depth = 30;
};

class Measure;

struct Pushforward {
  std::shared_ptr<const Measure> base;
  PhaseMap map;
};

/// Immutable finite Borel measure.
class Measure {
public:
  enum class Kind { LebesgueBox, LebesgueDisc, SelfSimilar, Pushforward };

  static Measure lebesgue_box(Vec lo, Vec hi);
  static Measure unit_interval() { return lebesgue_box(Vec::Zero(1), Vec::Ones(1)); }
  static Measure unit_cube(int dim) { return lebesgue_box(Vec::Zero(dim), Vec::Ones(dim)); }
  static Measure lebesgue_disc(Vec center, double radius);
  static Measure self_similar(int ratio, std::vector<double> digits, std::vector<double> weights, int depth = 30);
  /// The ratio-`ratio` measure with equal weights on `digits`.
  static Measure uniform_self_similar(int ratio, std::vector<double> digits, int depth = 30);

  Kind kind() const;
  int dim() const { return dim_; }
  double total_mass() const { return mass_; }
  /// Bounding box of the support. For pushforwards this is the bounding box of the images of a
  /// fixed node set of the base measure, so it can be slightly smaller than the true hull.
  Box support_box() const;
  std::string describe() const;

  const LebesgueBox* as_box() const;
  const LebesgueDisc* as_disc() const;
  const SelfSimilar* as_self_similar() const;
  const Pushforward* as_pushforward() const;

  struct Data;

private:
  friend Measure pushforward(const Measure& mu, const PhaseMap& phi);
  explicit Measure(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
  int dim_ = 0;
  double mass_ = 0.0;
};

/// The pushforward phi_* mu: E -> mu(phi^{-1}(E)).
Measure pushforward(const Measure& mu, const PhaseMap& phi);

// ---------------------------------------------------------------------------------------------
// Integration

using Integrand = std::function<Complex(std::span<const double>)>;

struct IntegralEstimate {
  Complex value;
  double error = 0.0;
  std::size_t nodes = 0;
};

/// Integral of f against mu. Throws QuadratureError on a scheme/measure mismatch, a non-finite
/// integrand value, or (tensor-gauss) failure to reach the tolerance within max_panels.
IntegralEstimate integrate(const Integrand& f, const Measure& mu, const QuadratureSpec& quad);

/// Integrates a family of functions over one shared rule. The kernel receives a rule in the
/// coordinates of mu and adds sum_n w_n g_k(y_n) to sums[k] and sum_n w_n |g_k(y_n)|^2 to
/// sum_sq[k] (sum_sq may be empty when the scheme does not need second moments).
using FamilyKernel = std::function<void(const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq)>;

struct FamilyEstimate {
  std::vector<Complex> values;
  std::vector<double> errors;
  std::size_t nodes = 0;
  int refinements = 0;
  QuadratureSpec used;  // the spec with refined parameters (e.g. final panel count)

  double max_error() const;
};

/// With strict = false a tolerance miss returns the best estimate instead of throwing.
FamilyEstimate integrate_family(const Measure& mu, std::size_t family_size, const FamilyKernel& kernel,
                                const QuadratureSpec& quad, bool strict = true);

/// Fixed (non-adaptive) discretization of mu under a tensor-gauss, monte-carlo or digit spec.
Discretization discretize(const Measure& mu, const QuadratureSpec& quad);

/// Composite tensor Gauss rule with `order` nodes on each of `panels` panels per parameter axis.
QuadratureRule tensor_rule(const Measure& mu, int order, int panels);
/// Digit-cylinder rule at enumeration level `level` (SelfSimilar and its pushforwards).
QuadratureRule digit_rule(const Measure& mu, int level);
/// Deepest digit level whose rule stays within max_nodes, capped by depth.
int digit_level(const Measure& mu, const DigitScheme& spec);

// ---------------------------------------------------------------------------------------------
// Sampling and transforms

/// n i.i.d. draws, deterministic in (seed, n). Work is split into fixed-size batches with
/// independent streams, so results do not depend on the thread count.
PointSet sample(const Measure& mu, std::size_t n, std::uint64_t seed);

/// mu-hat(xi) = int e^{2 pi i xi.x} dmu. SelfSimilar uses the truncated infinite product with
/// `trunc` factors, gated by a one-time cross-validation against digit quadrature.
Complex fourier_transform(const Measure& mu, const Vec& xi, int trunc = 40);

/// Truncated product prod_{n=1..levels} m(xi / ratio^n) without the validation gate.
Complex self_similar_product(const SelfSimilar& s, double xi, int levels);

/// Runs (once per parameter set) the cross-validation of the product formula against digit
/// quadrature; throws QuadratureError if it fails.
void require_product_formula(const SelfSimilar& s);

/// phi_* mu in closed self-similar form, when recognizable: Lebesgue[0,1] or a SelfSimilar
/// measure pushed through a DigitMap whose input digits match. `levels` is the digit depth of
/// the map (the pushforward of a depth-D map is the D-level truncation).
struct KnownPushforward {
  SelfSimilar measure;
  int levels = 0;
};
std::optional<KnownPushforward> known_pushforward(const Measure& mu, const PhaseMap& phi);

/// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and `cdf`.
double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

}  // namespace nlphase
