#include "nlphase/phase_map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <variant>

#include "nlphase/matrix_exp.hpp"
#include "nlphase/quadrature.hpp"

namespace nlphase {

namespace {

constexpr double kHolhosScale = 0.39894228040143267794;  // 1 / sqrt(2 pi)

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Anchor spacing for the memoized antiderivative of 1/z.
constexpr double kAnchorStep = 1.0 / 64.0;

}  // namespace

using Params = std::variant<IdentityParams, AffineParams, DigitMapParams, HolhosParams, UnipotentParams,
                            Triangular2DParams, GroupExpParams, CustomParams, CompositeParams>;

struct PhaseMap::State {
  Params params;
  int in_dim = 1;
  int out_dim = 1;

  // DigitMap: hull of the tails and the output digit table.
  double tail_lo = 0.0;
  double tail_hi = 1.0;

  // Triangular2D: memoized values of int_1^{a} dt / z(t) on anchors a = k * kAnchorStep.
  mutable std::shared_mutex anchor_mutex;
  mutable std::map<long long, double> anchors;

  explicit State(Params p) : params(std::move(p)) {}

  double inverse_z(double t) const {
    const auto& p = std::get<Triangular2DParams>(params);
    const double zt = p.z(t);
    if (!(zt > 0.0)) throw DomainError("triangular2d: z(" + std::to_string(t) + ") = " + std::to_string(zt) + " is not positive");
    return 1.0 / zt;
  }

  double integral(double a, double b, double tol) const {
    if (a == b) return 0.0;
    const Estimate e = integrate_adaptive([this](double t) { return inverse_z(t); }, a, b, tol, 4000);
    if (!(e.error <= tol * 10.0)) throw QuadratureError("triangular2d: inner integral did not converge");
    return e.value;
  }

  double anchor_value(long long k) const {
    {
      std::shared_lock lock(anchor_mutex);
      auto it = anchors.find(k);
      if (it != anchors.end()) return it->second;
    }
    const double value = integral(1.0, static_cast<double>(k) * kAnchorStep, 1e-12);
    std::unique_lock lock(anchor_mutex);
    anchors.emplace(k, value);
    return value;
  }

  // int_1^{x2} dt / z(t)
  double antiderivative(double x2) const {
    if (!std::isfinite(x2)) throw DomainError("triangular2d: non-finite x2");
    const long long k = std::llround(x2 / kAnchorStep);
    const double a = static_cast<double>(k) * kAnchorStep;
    return anchor_value(k) + integral(a, x2, 1e-14);
  }
};

namespace {

using State = PhaseMap::State;

void eval_digit_map(const State& s, const DigitMapParams& p, double x, double& y) {
  const double rho = p.in_base;
  const double slack = 1e-12;
  double r = std::clamp(x, s.tail_lo, s.tail_hi);
  double out = 0.0;
  double scale = 1.0;
  for (int i = 0; i < p.depth; ++i) {
    const double t = r * rho;
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    // in_digits is sorted ascending, so the first feasible digit is the smallest one, which
    // yields the non-terminating expansion at ambiguous points.
    for (std::size_t j = 0; j < p.in_digits.size(); ++j) {
      const double rem = t - p.in_digits[j];
      const double gap = std::max({0.0, s.tail_lo - rem, rem - s.tail_hi});
      if (gap <= slack) {
        best = j;
        best_gap = 0.0;
        break;
      }
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    r = std::clamp(t - p.in_digits[best], s.tail_lo, s.tail_hi);
    scale /= p.out_base;
    out += p.out_digits[best] * scale;
  }
  y = out;
}

void eval_holhos(std::span<const double> x, std::span<double> y) {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  if (r2 == 0.0) {
    y[0] = 0.0;
    y[1] = 0.0;
    return;
  }
  const double r = std::sqrt(r2);
  const double a = std::asin(std::clamp((x[0] * x[0] - x[1] * x[1]) / r2, -1.0, 1.0));
  y[0] = sgn(x[0]) * r * kHolhosScale * (kPi / 2 + a);
  y[1] = sgn(x[1]) * r * kHolhosScale * (kPi / 2 - a);
}

Mat group_exponent(const GroupExpParams& p, std::span<const double> t) {
  Mat S = Mat::Zero(p.ell.size(), p.ell.size());
  for (std::size_t k = 0; k < p.A.size(); ++k) S -= t[k] * p.A[k];
  if (!p.nilpotent) return expm(S);
  Mat E = Mat::Identity(S.rows(), S.cols());
  Mat term = E;
  for (Eigen::Index j = 1; j < S.rows(); ++j) {
    term = term * S / static_cast<double>(j);
    E += term;
  }
  return E;
}

void evaluate(const State& s, std::span<const double> x, std::span<double> y, bool checked) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IdentityParams>) {
          std::copy(x.begin(), x.end(), y.begin());
        } else if constexpr (std::is_same_v<T, AffineParams>) {
          const Eigen::Map<const Vec> xv(x.data(), static_cast<Eigen::Index>(x.size()));
          Eigen::Map<Vec> yv(y.data(), static_cast<Eigen::Index>(y.size()));
          yv = p.M * xv + p.b;
        } else if constexpr (std::is_same_v<T, DigitMapParams>) {
          if (checked && !(x[0] >= s.tail_lo - 1e-12 && x[0] <= s.tail_hi + 1e-12))
            throw DomainError("digit_map: x = " + std::to_string(x[0]) + " outside [" + std::to_string(s.tail_lo) + ", " +
                              std::to_string(s.tail_hi) + "]");
          eval_digit_map(s, p, x[0], y[0]);
        } else if constexpr (std::is_same_v<T, HolhosParams>) {
          if (checked && x[0] * x[0] + x[1] * x[1] > 1.0 + 1e-12)
            throw DomainError("holhos: point outside the closed unit disc");
          eval_holhos(x, y);
        } else if constexpr (std::is_same_v<T, UnipotentParams>) {
          for (int k = 0; k + 1 < p.dim; ++k) y[k] = x[k] + p.l[static_cast<std::size_t>(k)](x);
          y[p.dim - 1] = x[p.dim - 1];
        } else if constexpr (std::is_same_v<T, Triangular2DParams>) {
          const double zt = p.z(x[1]);
          if (!(zt > 0.0)) throw DomainError("triangular2d: z(" + std::to_string(x[1]) + ") = " + std::to_string(zt) + " is not positive");
          const double second = s.antiderivative(x[1]) + p.K;
          y[0] = zt * x[0] + p.f(x[1]);
          y[1] = second;
        } else if constexpr (std::is_same_v<T, GroupExpParams>) {
          const Vec v = group_exponent(p, x).transpose() * p.ell;
          if (!v.allFinite()) throw DomainError("group_exp: phase overflows");
          for (Eigen::Index i = 0; i < v.size(); ++i) y[static_cast<std::size_t>(i)] = v[i];
        } else if constexpr (std::is_same_v<T, CustomParams>) {
          p.fn(x, y);
        } else {
          std::vector<double> mid(static_cast<std::size_t>(p.inner.out_dim()));
          if (checked) {
            p.inner.eval(x, mid);
            p.outer.eval(mid, y);
          } else {
            p.inner.eval_unchecked(x, mid);
            p.outer.eval_unchecked(mid, y);
          }
        }
      },
      s.params);
}

std::shared_ptr<State> make_state(Params p, int in_dim, int out_dim) {
  auto s = std::make_shared<State>(std::move(p));
  s->in_dim = in_dim;
  s->out_dim = out_dim;
  return s;
}

}  // namespace

PhaseMap::PhaseMap() : PhaseMap(identity(1)) {}

PhaseMap PhaseMap::identity(int dim) {
  if (dim < 1) throw DomainError("identity: dim must be >= 1");
  return PhaseMap(make_state(IdentityParams{dim}, dim, dim));
}

PhaseMap PhaseMap::affine(Mat M, Vec b) {
  if (M.rows() != b.size() || M.rows() == 0) throw DomainError("affine: M rows must match b");
  const int in = static_cast<int>(M.cols());
  const int out = static_cast<int>(M.rows());
  return PhaseMap(make_state(AffineParams{std::move(M), std::move(b)}, in, out));
}

PhaseMap PhaseMap::digit_map(DigitMapParams p) {
  if (p.in_base < 2 || p.out_base < 2) throw DomainError("digit_map: bases must be >= 2");
  if (p.in_digits.empty() || p.in_digits.size() != p.out_digits.size())
    throw DomainError("digit_map: digit table must be non-empty and aligned");
  if (p.depth < 1) throw DomainError("digit_map: depth must be >= 1");
  std::vector<std::size_t> order(p.in_digits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p.in_digits[a] < p.in_digits[b]; });
  DigitMapParams sorted = p;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.in_digits[i] = p.in_digits[order[i]];
    sorted.out_digits[i] = p.out_digits[order[i]];
  }
  for (std::size_t i = 0; i < sorted.in_digits.size(); ++i) {
    if (sorted.in_digits[i] < 0 || sorted.in_digits[i] >= sorted.in_base) throw DomainError("digit_map: input digit out of range");
    if (sorted.out_digits[i] < 0 || sorted.out_digits[i] >= sorted.out_base) throw DomainError("digit_map: output digit out of range");
    if (i > 0 && sorted.in_digits[i] == sorted.in_digits[i - 1]) throw DomainError("digit_map: repeated input digit");
    for (std::size_t j = 0; j < i; ++j)
      if (sorted.out_digits[i] == sorted.out_digits[j]) throw DomainError("digit_map: output digit table is not injective");
  }
  auto s = make_state(sorted, 1, 1);
  s->tail_lo = sorted.in_digits.front() / static_cast<double>(sorted.in_base - 1);
  s->tail_hi = sorted.in_digits.back() / static_cast<double>(sorted.in_base - 1);
  return PhaseMap(s);
}

PhaseMap PhaseMap::holhos() { return PhaseMap(make_state(HolhosParams{}, 2, 2)); }

PhaseMap PhaseMap::unipotent(int dim, std::vector<ScalarFn> l, std::vector<std::string> labels) {
  if (dim < 2) throw DomainError("unipotent: dim must be >= 2");
  if (static_cast<int>(l.size()) != dim - 1) throw DomainError("unipotent: need dim - 1 functions");
  return PhaseMap(make_state(UnipotentParams{dim, std::move(l), std::move(labels)}, dim, dim));
}

PhaseMap PhaseMap::unipotent(int dim, const std::vector<Expression>& l) {
  std::vector<ScalarFn> fns;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < l.size(); ++k) {
    // l_k may use x_{k+2}..x_dim (1-based), i.e. bits k+1..dim-1.
    const std::uint32_t allowed = ((std::uint32_t{1} << dim) - 1) & ~((std::uint32_t{1} << (k + 1)) - 1);
    if ((l[k].variables_used() & ~allowed) != 0)
      throw DomainError("unipotent: l" + std::to_string(k + 1) + " = '" + l[k].text() + "' may only depend on x" +
                        std::to_string(k + 2) + "..x" + std::to_string(dim));
    fns.emplace_back([e = l[k]](std::span<const double> x) { return e(x); });
    labels.push_back(l[k].text());
  }
  return unipotent(dim, std::move(fns), std::move(labels));
}

PhaseMap PhaseMap::triangular2d(UnivariateFn z, UnivariateFn f, double K, std::string z_label, std::string f_label) {
  if (!z || !f) throw DomainError("triangular2d: z and f are required");
  return PhaseMap(make_state(Triangular2DParams{std::move(z), std::move(f), K, std::move(z_label), std::move(f_label)}, 2, 2));
}

PhaseMap PhaseMap::triangular2d(const Expression& z, const Expression& f, double K) {
  for (const Expression* e : {&z, &f})
    if ((e->variables_used() & ~std::uint32_t{2}) != 0)
      throw DomainError("triangular2d: '" + e->text() + "' may only depend on x2");
  auto wrap = [](const Expression& e) {
    return [e](double t) {
      const double x[2] = {0.0, t};
      return e(x);
    };
  };
  return triangular2d(wrap(z), wrap(f), K, z.text(), f.text());
}

PhaseMap PhaseMap::group_exp(std::vector<Mat> A, Vec ell) {
  if (A.empty()) throw DomainError("group_exp: need at least one generator");
  const Eigen::Index d = ell.size();
  for (const Mat& a : A)
    if (a.rows() != d || a.cols() != d) throw DomainError("group_exp: generators must be d x d with d = |ell|");
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j)
      if ((A[i] * A[j] - A[j] * A[i]).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("group_exp: generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " do not commute");
  bool nilpotent = true;
  for (const Mat& a : A) {
    Mat power = Mat::Identity(d, d);
    for (Eigen::Index j = 0; j < d; ++j) power = power * a;
    nilpotent = nilpotent && (power.array() == 0.0).all();
  }
  const int m = static_cast<int>(A.size());
  return PhaseMap(make_state(GroupExpParams{std::move(A), std::move(ell), nilpotent}, m, static_cast<int>(d)));
}

PhaseMap PhaseMap::custom(int in_dim, int out_dim, VectorFn fn, JacobianFn jacobian, std::vector<std::string> labels) {
  if (in_dim < 1 || out_dim < 1 || !fn) throw DomainError("custom: invalid map");
  return PhaseMap(make_state(CustomParams{in_dim, out_dim, std::move(fn), std::move(jacobian), std::move(labels)}, in_dim, out_dim));
}

PhaseMap PhaseMap::compose(const PhaseMap& outer, const PhaseMap& inner) {
  if (outer.in_dim() != inner.out_dim()) throw DomainError("compose: dimension mismatch");
  if (outer.kind() == Kind::Identity) return inner;
  if (inner.kind() == Kind::Identity) return outer;
  return PhaseMap(make_state(CompositeParams{outer, inner}, inner.in_dim(), outer.out_dim()));
}

PhaseMap::Kind PhaseMap::kind() const { return static_cast<Kind>(state_->params.index()); }
int PhaseMap::in_dim() const { return state_->in_dim; }
int PhaseMap::out_dim() const { return state_->out_dim; }

std::string PhaseMap::name() const {
  static constexpr const char* kNames[] = {"identity", "affine", "digit_map", "holhos", "unipotent",
                                           "triangular2d", "group_exp", "custom", "compose"};
  return kNames[state_->params.index()];
}

std::string PhaseMap::describe() const {
  std::ostringstream os;
  os << name();
  if (const auto* p = as_digit_map()) {
    os << "(base " << p->in_base << " -> " << p->out_base << ", depth " << p->depth << ")";
  } else if (const auto* u = as_unipotent()) {
    os << "(";
    for (std::size_t k = 0; k < u->labels.size(); ++k) os << (k ? ", " : "") << "l" << k + 1 << " = " << u->labels[k];
    os << ")";
  } else if (const auto* t = as_triangular2d()) {
    os << "(z = " << t->z_label << ", f = " << t->f_label << ", K = " << t->K << ")";
  } else if (const auto* c = as_composite()) {
    os << "(" << c->outer.describe() << " o " << c->inner.describe() << ")";
  } else if (const auto* i = as_identity()) {
    os << "(dim " << i->dim << ")";
  }
  return os.str();
}

Vec PhaseMap::operator()(const Vec& x) const {
  Vec y(out_dim());
  eval(as_span(x), {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

void PhaseMap::eval(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) != in_dim() || static_cast<int>(y.size()) != out_dim())
    throw DomainError(name() + ": dimension mismatch");
  evaluate(*state_, x, y, true);
}

void PhaseMap::eval_unchecked(std::span<const double> x, std::span<double> y) const { evaluate(*state_, x, y, false); }

bool PhaseMap::differentiable() const {
  if (kind() == Kind::DigitMap) return false;
  if (const auto* c = as_composite()) return c->outer.differentiable() && c->inner.differentiable();
  return true;
}

bool PhaseMap::has_analytic_jacobian() const {
  switch (kind()) {
    case Kind::Identity:
    case Kind::Affine:
    case Kind::Unipotent:
    case Kind::Triangular2D:
    case Kind::GroupExp: return true;
    case Kind::Custom: return static_cast<bool>(as_custom()->jacobian);
    case Kind::Composite: return as_composite()->outer.has_analytic_jacobian() && as_composite()->inner.has_analytic_jacobian();
    default: return false;
  }
}

Mat finite_difference_jacobian(const PhaseMap& phi, const Vec& x, double h) {
  const int n = phi.in_dim();
  const int m = phi.out_dim();
  Mat J(m, n);
  Vec xp = x;
  Vec xm = x;
  Vec yp(m);
  Vec ym(m);
  for (int j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    phi.eval_unchecked(as_span(xp), {yp.data(), static_cast<std::size_t>(m)});
    phi.eval_unchecked(as_span(xm), {ym.data(), static_cast<std::size_t>(m)});
    J.col(j) = (yp - ym) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  if (!J.allFinite()) throw DomainError(phi.name() + ": non-finite difference quotient");
  return J;
}

Mat PhaseMap::jacobian(const Vec& x, double h) const {
  if (x.size() != in_dim()) throw DomainError(name() + ": dimension mismatch");
  if (!differentiable()) throw DomainError(name() + ": map is not differentiable");
  if (!(h > 0.0)) throw DomainError("jacobian: step must be positive");
  const auto fd1 = [h](const UnivariateFn& g, double t) { return (g(t + h) - g(t - h)) / (2.0 * h); };
  switch (kind()) {
    case Kind::Identity: return Mat::Identity(in_dim(), in_dim());
    case Kind::Affine: return as_affine()->M;
    case Kind::Unipotent: {
      const auto& p = *as_unipotent();
      Mat J = Mat::Identity(p.dim, p.dim);
      Vec xs = x;
      for (int k = 0; k + 1 < p.dim; ++k) {
        const auto& l = p.l[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < p.dim; ++j) {
          xs[j] = x[j] + h;
          const double up = l(as_span(xs));
          xs[j] = x[j] - h;
          const double down = l(as_span(xs));
          xs[j] = x[j];
          J(k, j) = (up - down) / (2.0 * h);
        }
      }
      return J;
    }
    case Kind::Triangular2D: {
      const auto& p = *as_triangular2d();
      const double zt = p.z(x[1]);
      if (!(zt > 0.0)) throw DomainError("triangular2d: z is not positive");
      Mat J(2, 2);
      J << zt, fd1(p.f, x[1]) + x[0] * fd1(p.z, x[1]), 0.0, 1.0 / zt;
      return J;
    }
    case Kind::GroupExp: {
      const auto& p = *as_group_exp();
      const Mat E = group_exponent(p, as_span(x));
      Mat J(out_dim(), in_dim());
      for (std::size_t k = 0; k < p.A.size(); ++k) J.col(static_cast<Eigen::Index>(k)) = -(p.A[k] * E).transpose() * p.ell;
      return J;
    }
    case Kind::Custom:
      if (as_custom()->jacobian) return as_custom()->jacobian(as_span(x));
      return finite_difference_jacobian(*this, x, h);
    case Kind::Composite: {
      const auto& c = *as_composite();
      return c.outer.jacobian(c.inner(x), h) * c.inner.jacobian(x, h);
    }
    default: return finite_difference_jacobian(*this, x, h);
  }
}

double PhaseMap::singular_distance(const Vec& x) const {
  if (kind() == Kind::Holhos) return std::min(std::abs(x[0]), std::abs(x[1]));
  if (const auto* c = as_composite()) return std::min(c->inner.singular_distance(x), c->outer.singular_distance(c->inner(x)));
  return std::numeric_limits<double>::infinity();
}

std::optional<double> PhaseMap::triangular_second_inverse(double y2, double lo, double hi) const {
  const auto* p = as_triangular2d();
  if (!p) throw DomainError("triangular_second_inverse: not a triangular2d map");
  auto g = [&](double t) { return state_->antiderivative(t) + p->K; };
  double glo = g(lo);
  double ghi = g(hi);
  if (y2 < glo || y2 > ghi) return std::nullopt;
  // g is increasing with g' = 1/z; safeguarded Newton inside [lo, hi].
  double a = lo;
  double b = hi;
  double t = (ghi > glo) ? lo + (hi - lo) * (y2 - glo) / (ghi - glo) : lo;
  for (int iter = 0; iter < 100; ++iter) {
    const double r = g(t) - y2;
    if (r == 0.0) return t;
    if (r > 0.0) b = t; else a = t;
    double next = t - r / state_->inverse_z(t);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t)) || b - a <= 1e-15) return next;
    t = next;
  }
  return t;
}

const IdentityParams* PhaseMap::as_identity() const { return std::get_if<IdentityParams>(&state_->params); }
const AffineParams* PhaseMap::as_affine() const { return std::get_if<AffineParams>(&state_->params); }
const DigitMapParams* PhaseMap::as_digit_map() const { return std::get_if<DigitMapParams>(&state_->params); }
const UnipotentParams* PhaseMap::as_unipotent() const { return std::get_if<UnipotentParams>(&state_->params); }
const Triangular2DParams* PhaseMap::as_triangular2d() const { return std::get_if<Triangular2DParams>(&state_->params); }
const GroupExpParams* PhaseMap::as_group_exp() const { return std::get_if<GroupExpParams>(&state_->params); }
const CustomParams* PhaseMap::as_custom() const { return std::get_if<CustomParams>(&state_->params); }
const CompositeParams* PhaseMap::as_composite() const { return std::get_if<CompositeParams>(&state_->params); }

}  // namespace nlphase
