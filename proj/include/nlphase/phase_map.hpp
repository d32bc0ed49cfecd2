#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlphase/expression.hpp"
#include "nlphase/types.hpp"

namespace nlphase {

/// Scalar function of a full point (x1..xd).
using ScalarFn = std::function<double(std::span<const double>)>;
/// Scalar function of one real variable.
using UnivariateFn = std::function<double(double)>;
using VectorFn = std::function<void(std::span<const double> x, std::span<double> y)>;
using JacobianFn = std::function<Mat(std::span<const double> x)>;

class PhaseMap;

struct IdentityParams {
  int dim = 1;
};

struct AffineParams {
  Mat M;
  Vec b;
};

/// Re-encodes the base-`in_base` expansion of x over `in_digits` into base `out_base`, digit
/// in_digits[j] becoming out_digits[j]. Ambiguous expansions take the non-terminating form.
struct DigitMapParams {
  int in_base = 2;
  std::vector<int> in_digits;
  int out_base = 4;
  std::vector<int> out_digits;
  int depth = 30;
};

/// Area-preserving map from the closed unit disc onto the square |X| + |Y| <= sqrt(pi/2).
struct HolhosParams {};

/// phi_k(x) = x_k + l_k(x_{k+1}, ..., x_d) for k < d, phi_d(x) = x_d.
/// Each l_k receives the full point but may only read coordinates after k.
struct UnipotentParams {
  int dim = 2;
  std::vector<ScalarFn> l;
  std::vector<std::string> labels;
};

/// phi(x) = (z(x2) x1 + f(x2), int_1^{x2} dt / z(t) + K) with z > 0.
struct Triangular2DParams {
  UnivariateFn z;
  UnivariateFn f;
  double K = 0.0;
  std::string z_label;
  std::string f_label;
};

/// phi(t) = exp(-sum_k t_k A_k)^T ell for pairwise commuting A_k.
struct GroupExpParams {
  std::vector<Mat> A;
  Vec ell;
  /// Set at construction when every A_k^d vanishes exactly. The exponential is then the
  /// terminating power series, which is exact for polynomial phases such as (1, -t).
  bool nilpotent = false;
};

struct CustomParams {
  int in_dim = 1;
  int out_dim = 1;
  VectorFn fn;
  JacobianFn jacobian;  // may be empty
  std::vector<std::string> labels;
};

struct CompositeParams;

/// Immutable phase function phi: R^in_dim -> R^out_dim. Copies share state and evaluation is
/// thread-safe.
class PhaseMap {
public:
  enum class Kind { Identity, Affine, DigitMap, Holhos, Unipotent, Triangular2D, GroupExp, Custom, Composite };

  /// The identity on R^1.
  PhaseMap();

  static PhaseMap identity(int dim);
  static PhaseMap affine(Mat M, Vec b);
  static PhaseMap digit_map(DigitMapParams params);
  static PhaseMap holhos();
  static PhaseMap unipotent(int dim, std::vector<ScalarFn> l, std::vector<std::string> labels = {});
  /// Unipotent map from expressions; l[k] may only reference x_{k+2}..x_d (1-based names).
  static PhaseMap unipotent(int dim, const std::vector<Expression>& l);
  static PhaseMap triangular2d(UnivariateFn z, UnivariateFn f, double K, std::string z_label = {},
                               std::string f_label = {});
  /// Triangular map from expressions in the variable x2.
  static PhaseMap triangular2d(const Expression& z, const Expression& f, double K);
  static PhaseMap group_exp(std::vector<Mat> A, Vec ell);
  static PhaseMap custom(int in_dim, int out_dim, VectorFn fn, JacobianFn jacobian = {},
                         std::vector<std::string> labels = {});
  /// x -> outer(inner(x)).
  static PhaseMap compose(const PhaseMap& outer, const PhaseMap& inner);

  Kind kind() const;
  int in_dim() const;
  int out_dim() const;
  std::string name() const;
  std::string describe() const;

  /// Checked evaluation; throws DomainError outside the variant's domain.
  Vec operator()(const Vec& x) const;
  void eval(std::span<const double> x, std::span<double> y) const;
  /// Formula evaluation without the domain test (used for difference stencils at the edge of
  /// the domain). Triangular2D still refuses z <= 0.
  void eval_unchecked(std::span<const double> x, std::span<double> y) const;

  bool differentiable() const;
  bool has_analytic_jacobian() const;
  /// Analytic Jacobian when the variant has one, otherwise central differences with step h.
  Mat jacobian(const Vec& x, double h = 1e-5) const;
  /// Distance from x to the locus where the map fails to be C^1 (+inf when there is none).
  double singular_distance(const Vec& x) const;

  const IdentityParams* as_identity() const;
  const AffineParams* as_affine() const;
  const DigitMapParams* as_digit_map() const;
  const UnipotentParams* as_unipotent() const;
  const Triangular2DParams* as_triangular2d() const;
  const GroupExpParams* as_group_exp() const;
  const CustomParams* as_custom() const;
  const CompositeParams* as_composite() const;

  /// Triangular2D: solves phi_2(x2) = y2 for x2 in [lo, hi]; nullopt when y2 is outside
  /// phi_2([lo, hi]).
  std::optional<double> triangular_second_inverse(double y2, double lo, double hi) const;

  struct State;

private:
  explicit PhaseMap(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

struct CompositeParams {
  PhaseMap outer;
  PhaseMap inner;
};

/// Central-difference Jacobian of an arbitrary map, evaluated without domain checks.
Mat finite_difference_jacobian(const PhaseMap& phi, const Vec& x, double h);

}  // namespace nlphase
