#include "nlphase/measure.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <sstream>
#include <variant>

#include <omp.h>

#include "nlphase/kernels.hpp"
#include "nlphase/rng.hpp"

namespace nlphase {

struct Measure::Data {
  std::variant<LebesgueBox, LebesgueDisc, SelfSimilar, Pushforward> kind;
};

namespace {

constexpr std::size_t kSampleBatch = 4096;
constexpr std::size_t kMaxTensorNodes = std::size_t{1} << 26;

// The non-pushforward measure at the bottom of mu, with the maps to apply (innermost first).
const Measure& root_of(const Measure& mu, std::vector<PhaseMap>& chain) {
  if (const auto* p = mu.as_pushforward()) {
    const Measure& r = root_of(*p->base, chain);
    chain.push_back(p->map);
    return r;
  }
  return mu;
}

PointSet apply_chain(const std::vector<PhaseMap>& chain, PointSet nodes) {
  for (const PhaseMap& m : chain) nodes = kernels::map_points(m, nodes);
  return nodes;
}

struct ParamCell {
  Vec lo;
  Vec hi;
  bool polar = false;
};

std::vector<ParamCell> parameter_cells(const Measure& root) {
  if (const auto* b = root.as_box()) return {ParamCell{b->lo, b->hi, false}};
  if (const auto* d = root.as_disc()) {
    std::vector<ParamCell> cells;
    for (int q = 0; q < 4; ++q) {
      Vec lo(2);
      Vec hi(2);
      lo << 0.0, q * kPi / 2;
      hi << d->radius, (q + 1) * kPi / 2;
      cells.push_back({lo, hi, true});
    }
    return cells;
  }
  throw QuadratureError("scheme needs a Lebesgue base measure, got " + root.describe());
}

// Maps parameter-space nodes of a cell to the root measure, folding the Jacobian into w.
void cell_to_space(const Measure& root, const ParamCell& cell, PointSet& nodes, std::vector<double>& w) {
  if (!cell.polar) return;
  const LebesgueDisc& d = *root.as_disc();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto p = nodes[i];
    const double r = p[0];
    const double t = p[1];
    p[0] = d.center[0] + r * std::cos(t);
    p[1] = d.center[1] + r * std::sin(t);
    w[i] *= r;
  }
}

// Tensor rule over one parameter cell built from a 1-D rule on [-1, 1] repeated on `panels`
// panels per axis.
void append_tensor(const ParamCell& cell, std::span<const double> x1, std::span<const double> w1, int panels,
                   PointSet& nodes, std::vector<double>& w) {
  const int dim = static_cast<int>(cell.lo.size());
  std::vector<std::vector<double>> axis_nodes(static_cast<std::size_t>(dim));
  std::vector<std::vector<double>> axis_weights(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    const double width = (cell.hi[a] - cell.lo[a]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = cell.lo[a] + (p + 0.5) * width;
      for (std::size_t i = 0; i < x1.size(); ++i) {
        axis_nodes[static_cast<std::size_t>(a)].push_back(c + 0.5 * width * x1[i]);
        axis_weights[static_cast<std::size_t>(a)].push_back(0.5 * width * w1[i]);
      }
    }
  }
  const std::size_t per_axis = axis_nodes[0].size();
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= per_axis;
  nodes.dim = dim;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> point(static_cast<std::size_t>(dim));
  for (std::size_t n = 0; n < total; ++n) {
    double weight = 1.0;
    for (int a = 0; a < dim; ++a) {
      point[static_cast<std::size_t>(a)] = axis_nodes[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
      weight *= axis_weights[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
    }
    nodes.push_back(point);
    w.push_back(weight);
    for (int a = dim - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < per_axis) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
}

QuadratureRule tensor_rule_root(const Measure& root, std::span<const double> x1, std::span<const double> w1, int panels) {
  QuadratureRule rule;
  rule.nodes.dim = root.dim();
  const auto cells = parameter_cells(root);
  std::size_t expected = cells.size();
  for (int a = 0; a < root.dim(); ++a) expected *= x1.size() * static_cast<std::size_t>(panels);
  if (expected > kMaxTensorNodes) throw QuadratureError("tensor rule would need " + std::to_string(expected) + " nodes");
  for (const ParamCell& cell : cells) {
    QuadratureRule part;
    append_tensor(cell, x1, w1, panels, part.nodes, part.weights);
    cell_to_space(root, cell, part.nodes, part.weights);
    rule.nodes.coords.insert(rule.nodes.coords.end(), part.nodes.coords.begin(), part.nodes.coords.end());
    rule.weights.insert(rule.weights.end(), part.weights.begin(), part.weights.end());
  }
  return rule;
}

std::string self_similar_key(const SelfSimilar& s) {
  std::ostringstream os;
  os.precision(17);
  os << s.ratio;
  for (std::size_t j = 0; j < s.digits.size(); ++j) os << ';' << s.digits[j] << ':' << s.weights[j];
  return os.str();
}

Measure from_self_similar(const SelfSimilar& s) { return Measure::self_similar(s.ratio, s.digits, s.weights, s.depth); }

}  // namespace

// ---------------------------------------------------------------------------------------------
// Construction

Measure::Measure(std::shared_ptr<const Data> data) : data_(std::move(data)) {
  std::visit(
      [this](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LebesgueBox>) {
          dim_ = static_cast<int>(k.lo.size());
          mass_ = (k.hi - k.lo).prod();
        } else if constexpr (std::is_same_v<T, LebesgueDisc>) {
          dim_ = 2;
          mass_ = kPi * k.radius * k.radius;
        } else if constexpr (std::is_same_v<T, SelfSimilar>) {
          dim_ = 1;
          mass_ = 1.0;
        } else {
          dim_ = k.map.out_dim();
          mass_ = k.base->total_mass();
        }
      },
      data_->kind);
}

Measure Measure::lebesgue_box(Vec lo, Vec hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) throw DomainError("lebesgue_box: lo and hi must have equal positive length");
  for (Eigen::Index k = 0; k < lo.size(); ++k)
    if (!(hi[k] > lo[k])) throw DomainError("lebesgue_box: need lo < hi in every coordinate");
  return Measure(std::make_shared<Data>(Data{LebesgueBox{std::move(lo), std::move(hi)}}));
}

Measure Measure::lebesgue_disc(Vec center, double radius) {
  if (center.size() != 2) throw DomainError("lebesgue_disc: center must be a 2-vector");
  if (!(radius > 0.0)) throw DomainError("lebesgue_disc: radius must be positive");
  return Measure(std::make_shared<Data>(Data{LebesgueDisc{std::move(center), radius}}));
}

Measure Measure::self_similar(int ratio, std::vector<double> digits, std::vector<double> weights, int depth) {
  if (ratio < 2) throw DomainError("self_similar: ratio must be >= 2");
  if (digits.empty() || digits.size() != weights.size()) throw DomainError("self_similar: digits and weights must align");
  if (depth < 1) throw DomainError("self_similar: depth must be >= 1");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw DomainError("self_similar: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("self_similar: weights must sum to 1");
  return Measure(std::make_shared<Data>(Data{SelfSimilar{ratio, std::move(digits), std::move(weights), depth}}));
}

Measure Measure::uniform_self_similar(int ratio, std::vector<double> digits, int depth) {
  std::vector<double> w(digits.size(), 1.0 / static_cast<double>(digits.size()));
  return self_similar(ratio, std::move(digits), std::move(w), depth);
}

Measure pushforward(const Measure& mu, const PhaseMap& phi) {
  if (phi.in_dim() != mu.dim())
    throw DomainError("pushforward: map expects dimension " + std::to_string(phi.in_dim()) + ", measure has " + std::to_string(mu.dim()));
  auto data = std::make_shared<Measure::Data>(Measure::Data{Pushforward{std::make_shared<const Measure>(mu), phi}});
  return Measure(std::move(data));
}

Measure::Kind Measure::kind() const { return static_cast<Kind>(data_->kind.index()); }
const LebesgueBox* Measure::as_box() const { return std::get_if<LebesgueBox>(&data_->kind); }
const LebesgueDisc* Measure::as_disc() const { return std::get_if<LebesgueDisc>(&data_->kind); }
const SelfSimilar* Measure::as_self_similar() const { return std::get_if<SelfSimilar>(&data_->kind); }
const Pushforward* Measure::as_pushforward() const { return std::get_if<Pushforward>(&data_->kind); }

std::string Measure::describe() const {
  std::ostringstream os;
  if (const auto* b = as_box()) {
    os << "lebesgue_box[";
    for (Eigen::Index k = 0; k < b->lo.size(); ++k) os << (k ? " x " : "") << "[" << b->lo[k] << ", " << b->hi[k] << "]";
    os << "]";
  } else if (const auto* d = as_disc()) {
    os << "lebesgue_disc(center (" << d->center[0] << ", " << d->center[1] << "), radius " << d->radius << ")";
  } else if (const auto* s = as_self_similar()) {
    os << "self_similar(ratio " << s->ratio << ", digits {";
    for (std::size_t j = 0; j < s->digits.size(); ++j) os << (j ? ", " : "") << s->digits[j];
    os << "})";
  } else {
    const auto* p = as_pushforward();
    os << "pushforward(" << p->base->describe() << ", " << p->map.describe() << ")";
  }
  return os.str();
}

Box Measure::support_box() const {
  if (const auto* b = as_box()) return {b->lo, b->hi};
  if (const auto* d = as_disc()) {
    const Vec r = Vec::Constant(2, d->radius);
    return {d->center - r, d->center + r};
  }
  if (const auto* s = as_self_similar()) {
    const auto [lo, hi] = std::minmax_element(s->digits.begin(), s->digits.end());
    return {Vec::Constant(1, *lo / (s->ratio - 1)), Vec::Constant(1, *hi / (s->ratio - 1))};
  }
  std::vector<PhaseMap> chain;
  const Measure& root = root_of(*this, chain);
  PointSet pts;
  if (root.kind() == Kind::SelfSimilar) {
    pts = digit_rule(root, digit_level(root, DigitScheme{30, std::size_t{1} << 14})).nodes;
  } else {
    // Uniform grid including the boundary of every parameter cell.
    const int per_axis = root.dim() <= 2 ? 65 : (root.dim() == 3 ? 17 : 5);
    std::vector<double> x1(static_cast<std::size_t>(per_axis));
    std::vector<double> w1(static_cast<std::size_t>(per_axis), 1.0);
    for (int i = 0; i < per_axis; ++i) x1[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (per_axis - 1);
    pts = tensor_rule_root(root, x1, w1, 1).nodes;
  }
  pts = apply_chain(chain, std::move(pts));
  Vec lo = Vec::Constant(pts.dim, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k < pts.dim; ++k) {
      lo[k] = std::min(lo[k], pts[i][k]);
      hi[k] = std::max(hi[k], pts[i][k]);
    }
  return {lo, hi};
}

// ---------------------------------------------------------------------------------------------
// Rules

QuadratureRule tensor_rule(const Measure& mu, int order, int panels) {
  std::vector<PhaseMap> chain;
  const Measure& root = root_of(mu, chain);
  const GaussRule& g = gauss_legendre(order);
  QuadratureRule rule = tensor_rule_root(root, g.nodes, g.weights, panels);
  rule.nodes = apply_chain(chain, std::move(rule.nodes));
  return rule;
}

// The self-similar structure the digit scheme enumerates. Lebesgue measure on [0, 1] is the
// equal-weight measure on all base-b digits; b follows the first digit map applied to it.
SelfSimilar digit_root(const Measure& mu, std::vector<PhaseMap>& chain) {
  const Measure& root = root_of(mu, chain);
  if (const SelfSimilar* s = root.as_self_similar()) return *s;
  const LebesgueBox* b = root.as_box();
  if (b && b->lo.size() == 1 && b->lo[0] == 0.0 && b->hi[0] == 1.0) {
    SelfSimilar s;
    s.ratio = !chain.empty() && chain.front().as_digit_map() ? chain.front().as_digit_map()->in_base : 2;
    for (int d = 0; d < s.ratio; ++d) {
      s.digits.push_back(d);
      s.weights.push_back(1.0 / s.ratio);
    }
    return s;
  }
  throw QuadratureError("digit scheme needs a self-similar or unit-interval base measure, got " + root.describe());
}

int digit_level(const Measure& mu, const DigitScheme& spec) {
  std::vector<PhaseMap> chain;
  const SelfSimilar ss = digit_root(mu, chain);
  const SelfSimilar* s = &ss;
  const std::size_t m = s->digits.size();
  int level = 0;
  std::size_t nodes = m * m;  // nodes at level + 1
  while (level < spec.depth && nodes <= spec.max_nodes) {
    ++level;
    nodes *= m;
  }
  if (level < 1) throw QuadratureError("digit scheme: max_nodes too small for one digit level");
  return level;
}

QuadratureRule digit_rule(const Measure& mu, int level) {
  std::vector<PhaseMap> chain;
  const SelfSimilar ss = digit_root(mu, chain);
  const SelfSimilar* s = &ss;
  if (level < 0) throw DomainError("digit_rule: negative level");
  const std::size_t m = s->digits.size();
  const double rho = s->ratio;
  // Cylinder left points and masses, level by level.
  std::vector<double> left = {0.0};
  std::vector<double> mass = {1.0};
  double scale = 1.0;
  for (int l = 0; l < level; ++l) {
    scale /= rho;
    std::vector<double> next_left;
    std::vector<double> next_mass;
    next_left.reserve(left.size() * m);
    next_mass.reserve(left.size() * m);
    for (std::size_t c = 0; c < left.size(); ++c)
      for (std::size_t j = 0; j < m; ++j) {
        next_left.push_back(left[c] + s->digits[j] * scale);
        next_mass.push_back(mass[c] * s->weights[j]);
      }
    left.swap(next_left);
    mass.swap(next_mass);
  }
  // Each cylinder's mass is spread over the m periodic points whose tails are the cyclic shifts
  // of the digit sequence. These lie in the support, never on a cylinder boundary (so digit maps
  // see an unambiguous expansion), and with equal weights they reproduce the cylinder mean.
  std::vector<double> tails(m, 0.0);
  const double period = 1.0 - std::pow(rho, -static_cast<double>(m));
  for (std::size_t t = 0; t < m; ++t) {
    double v = 0.0;
    double f = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      f /= rho;
      v += s->digits[(t + i) % m] * f;
    }
    tails[t] = v / period;
  }
  QuadratureRule rule;
  rule.nodes.dim = 1;
  rule.nodes.coords.reserve(left.size() * m);
  rule.weights.reserve(left.size() * m);
  for (std::size_t c = 0; c < left.size(); ++c)
    for (std::size_t t = 0; t < m; ++t) {
      rule.nodes.coords.push_back(left[c] + scale * tails[t]);
      rule.weights.push_back(mass[c] * s->weights[t]);
    }
  rule.nodes = apply_chain(chain, std::move(rule.nodes));
  return rule;
}

Discretization discretize(const Measure& mu, const QuadratureSpec& quad) {
  validate(quad);
  Discretization d;
  if (const auto* t = std::get_if<TensorGauss>(&quad)) {
    d.fine = tensor_rule(mu, t->order, t->panels);
    d.coarse = tensor_rule(mu, std::max(2, 3 * t->order / 4), t->panels);
  } else if (const auto* mc = std::get_if<MonteCarlo>(&quad)) {
    d.fine.nodes = sample(mu, mc->samples, mc->seed);
    d.fine.weights.assign(mc->samples, mu.total_mass() / static_cast<double>(mc->samples));
    d.model = ErrorModel::StandardError;
  } else if (const auto* ds = std::get_if<DigitScheme>(&quad)) {
    const int level = digit_level(mu, *ds);
    d.fine = digit_rule(mu, level);
    d.coarse = digit_rule(mu, level - 1);
  } else {
    throw QuadratureError("adaptive scheme has no fixed discretization");
  }
  return d;
}

// ---------------------------------------------------------------------------------------------
// Integration

double FamilyEstimate::max_error() const {
  double e = 0.0;
  for (double v : errors) e = std::max(e, v);
  return e;
}

namespace {

void run_kernel(const FamilyKernel& kernel, const QuadratureRule& rule, std::size_t n, std::vector<Complex>& sums,
                std::vector<double>* sum_sq) {
  sums.assign(n, Complex{});
  if (sum_sq) sum_sq->assign(n, 0.0);
  kernel(rule, sums, sum_sq ? std::span<double>(*sum_sq) : std::span<double>());
}

FamilyEstimate rule_difference(const FamilyKernel& kernel, const QuadratureRule& fine, const QuadratureRule& coarse,
                               std::size_t n) {
  FamilyEstimate est;
  std::vector<Complex> c;
  run_kernel(kernel, fine, n, est.values, nullptr);
  run_kernel(kernel, coarse, n, c, nullptr);
  est.errors.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(est.values[k].real()) || !std::isfinite(est.values[k].imag()))
      throw QuadratureError("non-finite integrand value at a quadrature node");
    est.errors[k] = std::abs(est.values[k] - c[k]);
  }
  est.nodes = fine.size() + coarse.size();
  return est;
}

struct AdaptiveCell {
  ParamCell cell;
  std::vector<Complex> kronrod;
  std::vector<double> diff;
  double error = 0.0;
  bool operator<(const AdaptiveCell& o) const { return error < o.error; }
};

FamilyEstimate adaptive_family(const Measure& mu, std::size_t n, const FamilyKernel& kernel, const AdaptiveScheme& spec,
                               bool strict) {
  std::vector<PhaseMap> chain;
  const Measure& root = root_of(mu, chain);
  const auto initial = parameter_cells(root);
  const KronrodPair& gk = gauss_kronrod_15();
  std::vector<double> gx;
  std::vector<double> gw;
  for (std::size_t i = 0; i < 15; ++i)
    if (gk.gauss_weights[i] != 0.0) {
      gx.push_back(gk.nodes[i]);
      gw.push_back(gk.gauss_weights[i]);
    }
  std::size_t nodes_used = 0;
  auto evaluate = [&](const ParamCell& cell) {
    AdaptiveCell out{cell, {}, {}, 0.0};
    QuadratureRule kr;
    QuadratureRule ga;
    append_tensor(cell, gk.nodes, gk.kronrod_weights, 1, kr.nodes, kr.weights);
    append_tensor(cell, gx, gw, 1, ga.nodes, ga.weights);
    cell_to_space(root, cell, kr.nodes, kr.weights);
    cell_to_space(root, cell, ga.nodes, ga.weights);
    kr.nodes = apply_chain(chain, std::move(kr.nodes));
    ga.nodes = apply_chain(chain, std::move(ga.nodes));
    std::vector<Complex> g;
    run_kernel(kernel, kr, n, out.kronrod, nullptr);
    run_kernel(kernel, ga, n, g, nullptr);
    out.diff.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(out.kronrod[k].real()) || !std::isfinite(out.kronrod[k].imag()))
        throw QuadratureError("non-finite integrand value at a quadrature node");
      out.diff[k] = std::abs(out.kronrod[k] - g[k]);
      out.error = std::max(out.error, out.diff[k]);
    }
    nodes_used += kr.size() + ga.size();
    return out;
  };
  std::priority_queue<AdaptiveCell> queue;
  double total_error = 0.0;
  for (const ParamCell& c : initial) {
    AdaptiveCell a = evaluate(c);
    total_error += a.error;
    queue.push(std::move(a));
  }
  int splits = 0;
  while (total_error > spec.abs_tol && splits < spec.max_subdivisions) {
    AdaptiveCell worst = queue.top();
    queue.pop();
    // Bisect along the axis that is longest relative to the initial cell.
    const ParamCell& c = worst.cell;
    int axis = 0;
    double best = -1.0;
    for (Eigen::Index a = 0; a < c.lo.size(); ++a) {
      const double rel = (c.hi[a] - c.lo[a]) / (initial[0].hi[a] - initial[0].lo[a]);
      if (rel > best * (1.0 + 1e-12)) {
        best = rel;
        axis = static_cast<int>(a);
      }
    }
    ParamCell left = c;
    ParamCell right = c;
    const double mid = 0.5 * (c.lo[axis] + c.hi[axis]);
    left.hi[axis] = mid;
    right.lo[axis] = mid;
    AdaptiveCell l = evaluate(left);
    AdaptiveCell r = evaluate(right);
    total_error += l.error + r.error - worst.error;
    queue.push(std::move(l));
    queue.push(std::move(r));
    ++splits;
  }
  FamilyEstimate est;
  est.values.assign(n, Complex{});
  est.errors.assign(n, 0.0);
  double recomputed = 0.0;
  std::size_t cells = queue.size();
  while (!queue.empty()) {
    const AdaptiveCell& a = queue.top();
    for (std::size_t k = 0; k < n; ++k) {
      est.values[k] += a.kronrod[k];
      est.errors[k] += a.diff[k];
    }
    recomputed += a.error;
    queue.pop();
  }
  if (strict && recomputed > spec.abs_tol)
    throw QuadratureError("adaptive cubature: error estimate " + std::to_string(recomputed) + " above tolerance " +
                          std::to_string(spec.abs_tol) + " after " + std::to_string(splits) + " subdivisions (" +
                          std::to_string(cells) + " cells)");
  est.nodes = nodes_used;
  est.refinements = splits;
  est.used = spec;
  return est;
}

}  // namespace

FamilyEstimate integrate_family(const Measure& mu, std::size_t n, const FamilyKernel& kernel, const QuadratureSpec& quad,
                                bool strict) {
  validate(quad);
  if (const auto* t = std::get_if<TensorGauss>(&quad)) {
    TensorGauss spec = *t;
    int refinements = 0;
    std::size_t nodes = 0;
    while (true) {
      FamilyEstimate est = rule_difference(kernel, tensor_rule(mu, spec.order, spec.panels),
                                           tensor_rule(mu, std::max(2, 3 * spec.order / 4), spec.panels), n);
      nodes += est.nodes;
      if (est.max_error() <= spec.tol) {
        est.nodes = nodes;
        est.refinements = refinements;
        est.used = spec;
        return est;
      }
      if (spec.panels * 2 > spec.max_panels) {
        if (!strict) {
          est.nodes = nodes;
          est.refinements = refinements;
          est.used = spec;
          return est;
        }
        throw QuadratureError("tensor-gauss: error estimate " + std::to_string(est.max_error()) + " above tolerance " +
                              std::to_string(spec.tol) + " at " + std::to_string(spec.panels) + " panels");
      }
      spec.panels *= 2;
      ++refinements;
    }
  }
  if (const auto* mc = std::get_if<MonteCarlo>(&quad)) {
    QuadratureRule rule;
    rule.nodes = sample(mu, mc->samples, mc->seed);
    rule.weights.assign(mc->samples, mu.total_mass() / static_cast<double>(mc->samples));
    FamilyEstimate est;
    std::vector<double> sq;
    run_kernel(kernel, rule, n, est.values, &sq);
    const double mass = mu.total_mass();
    const double count = static_cast<double>(mc->samples);
    est.errors.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex mean = est.values[k] / mass;
      const double var = std::max(0.0, sq[k] / mass - std::norm(mean)) * count / (count - 1.0);
      est.errors[k] = mass * std::sqrt(var / count);
    }
    est.nodes = rule.size();
    est.used = quad;
    return est;
  }
  if (const auto* ds = std::get_if<DigitScheme>(&quad)) {
    const int level = digit_level(mu, *ds);
    FamilyEstimate est = rule_difference(kernel, digit_rule(mu, level), digit_rule(mu, level - 1), n);
    est.used = DigitScheme{level, ds->max_nodes};
    return est;
  }
  return adaptive_family(mu, n, kernel, std::get<AdaptiveScheme>(quad), strict);
}

IntegralEstimate integrate(const Integrand& f, const Measure& mu, const QuadratureSpec& quad) {
  FamilyKernel kernel = [&](const QuadratureRule& rule, std::span<Complex> sums, std::span<double> sum_sq) {
    Complex s{};
    double q = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Complex v = f(rule.nodes[i]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream os;
        os << "non-finite integrand value at node (";
        for (int k = 0; k < rule.nodes.dim; ++k) os << (k ? ", " : "") << rule.nodes[i][k];
        os << ")";
        throw QuadratureError(os.str());
      }
      s += rule.weights[i] * v;
      q += rule.weights[i] * std::norm(v);
    }
    sums[0] += s;
    if (!sum_sq.empty()) sum_sq[0] += q;
  };
  const FamilyEstimate est = integrate_family(mu, 1, kernel, quad);
  return {est.values[0], est.errors[0], est.nodes};
}

// ---------------------------------------------------------------------------------------------
// Sampling

PointSet sample(const Measure& mu, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample: n must be >= 1");
  if (const auto* p = mu.as_pushforward()) return kernels::map_points(p->map, sample(*p->base, n, seed));
  PointSet out(mu.dim(), n);
  const std::size_t batches = (n + kSampleBatch - 1) / kSampleBatch;
  const long long nb = static_cast<long long>(batches);
  const int dim = mu.dim();
#pragma omp parallel for schedule(static) num_threads(kernels::num_threads())
  for (long long b = 0; b < nb; ++b) {
    CounterRng rng = split_stream(seed, static_cast<std::uint64_t>(b));
    const std::size_t begin = static_cast<std::size_t>(b) * kSampleBatch;
    const std::size_t end = std::min(n, begin + kSampleBatch);
    if (const auto* box = mu.as_box()) {
      for (std::size_t i = begin; i < end; ++i)
        for (int k = 0; k < dim; ++k) out[i][k] = rng.uniform(box->lo[k], box->hi[k]);
    } else if (const auto* disc = mu.as_disc()) {
      const double r = disc->radius;
      for (std::size_t i = begin; i < end; ++i) {
        double x;
        double y;
        do {
          x = rng.uniform(-r, r);
          y = rng.uniform(-r, r);
        } while (x * x + y * y > r * r);
        out[i][0] = disc->center[0] + x;
        out[i][1] = disc->center[1] + y;
      }
    } else {
      const SelfSimilar& s = *mu.as_self_similar();
      std::vector<double> cumulative(s.weights.size());
      std::partial_sum(s.weights.begin(), s.weights.end(), cumulative.begin());
      std::vector<std::size_t> digits(static_cast<std::size_t>(s.depth));
      for (std::size_t i = begin; i < end; ++i) {
        for (auto& d : digits) {
          const double u = rng.uniform();
          d = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end() - 1, u) - cumulative.begin());
        }
        double v = 0.0;
        for (auto it = digits.rbegin(); it != digits.rend(); ++it) v = (s.digits[*it] + v) / s.ratio;
        out[i][0] = v;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Fourier transforms

Complex self_similar_product(const SelfSimilar& s, double xi, int levels) {
  Complex prod{1.0, 0.0};
  double scaled = xi;
  for (int n = 1; n <= levels; ++n) {
    scaled /= s.ratio;
    Complex m{};
    for (std::size_t j = 0; j < s.digits.size(); ++j) m += s.weights[j] * unit_phase(s.digits[j] * scaled);
    prod *= m;
  }
  return prod;
}

void require_product_formula(const SelfSimilar& s) {
  static std::mutex mutex;
  static std::map<std::string, bool> validated;
  const std::string key = self_similar_key(s);
  std::lock_guard lock(mutex);
  auto it = validated.find(key);
  if (it == validated.end()) {
    const Measure mu = from_self_similar(s);
    const QuadratureRule rule = digit_rule(mu, digit_level(mu, DigitScheme{30, std::size_t{1} << 16}));
    double worst = 0.0;
    for (double xi : {0.37, 1.0, 2.5, 6.1, 17.3, -3.7}) {
      Complex q{};
      for (std::size_t i = 0; i < rule.size(); ++i) q += rule.weights[i] * unit_phase(xi * rule.nodes[i][0]);
      worst = std::max(worst, std::abs(q - self_similar_product(s, xi, 40)));
    }
    it = validated.emplace(key, worst <= 1e-3).first;
  }
  if (!it->second) throw QuadratureError("product formula failed cross-validation for " + from_self_similar(s).describe());
}

Complex fourier_transform(const Measure& mu, const Vec& xi, int trunc) {
  if (xi.size() != mu.dim()) throw DomainError("fourier_transform: frequency dimension mismatch");
  if (const auto* b = mu.as_box()) {
    Complex v{1.0, 0.0};
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
      const double L = b->hi[k] - b->lo[k];
      const double a = kPi * xi[k] * L;
      const double sinc = (a == 0.0) ? 1.0 : std::sin(a) / a;
      v *= L * sinc * unit_phase(0.5 * xi[k] * (b->lo[k] + b->hi[k]));
    }
    return v;
  }
  if (const auto* d = mu.as_disc()) {
    const double rho = xi.norm();
    const double a = kTwoPi * rho * d->radius;
    const double shape = (a == 0.0) ? 1.0 : 2.0 * std::cyl_bessel_j(1.0, a) / a;
    return mu.total_mass() * shape * unit_phase(xi.dot(d->center));
  }
  if (trunc < 1) throw DomainError("fourier_transform: trunc must be >= 1");
  if (const auto* s = mu.as_self_similar()) {
    require_product_formula(*s);
    return self_similar_product(*s, xi[0], trunc);
  }
  const Pushforward& p = *mu.as_pushforward();
  if (auto known = known_pushforward(*p.base, p.map)) {
    require_product_formula(known->measure);
    return self_similar_product(known->measure, xi[0], std::min(trunc, known->levels));
  }
  std::vector<PhaseMap> chain;
  const Measure& root = root_of(mu, chain);
  QuadratureSpec quad = root.kind() == Measure::Kind::SelfSimilar ? QuadratureSpec{DigitScheme{}} : QuadratureSpec{TensorGauss{}};
  return integrate([&](std::span<const double> y) { return unit_phase(xi.dot(to_vec(y))); }, mu, quad).value;
}

std::optional<KnownPushforward> known_pushforward(const Measure& mu, const PhaseMap& phi) {
  if (const auto* p = mu.as_pushforward()) {
    auto inner = known_pushforward(*p->base, p->map);
    if (!inner) return std::nullopt;
    if (phi.kind() == PhaseMap::Kind::Identity) return inner;
    auto outer = known_pushforward(from_self_similar(inner->measure), phi);
    if (!outer) return std::nullopt;
    // The inner map already truncates the digits; the outer one re-encodes them.
    outer->levels = std::min(outer->levels, inner->levels);
    return outer;
  }
  if (phi.kind() == PhaseMap::Kind::Identity) {
    if (const auto* s = mu.as_self_similar()) return KnownPushforward{*s, INT_MAX};
    return std::nullopt;
  }
  const DigitMapParams* dm = phi.as_digit_map();
  if (!dm) return std::nullopt;
  SelfSimilar in;
  if (const auto* b = mu.as_box()) {
    if (b->lo.size() != 1 || b->lo[0] != 0.0 || b->hi[0] != 1.0) return std::nullopt;
    if (static_cast<int>(dm->in_digits.size()) != dm->in_base) return std::nullopt;
    in.ratio = dm->in_base;
    for (int d = 0; d < dm->in_base; ++d) {
      in.digits.push_back(d);
      in.weights.push_back(1.0 / dm->in_base);
    }
  } else if (const auto* s = mu.as_self_similar()) {
    in = *s;
  } else {
    return std::nullopt;
  }
  if (in.ratio != dm->in_base || in.digits.size() != dm->in_digits.size()) return std::nullopt;
  SelfSimilar out;
  out.ratio = dm->out_base;
  out.depth = in.depth;
  for (std::size_t j = 0; j < in.digits.size(); ++j) {
    auto it = std::find(dm->in_digits.begin(), dm->in_digits.end(), static_cast<int>(in.digits[j]));
    if (it == dm->in_digits.end() || static_cast<double>(*it) != in.digits[j]) return std::nullopt;
    out.digits.push_back(dm->out_digits[static_cast<std::size_t>(it - dm->in_digits.begin())]);
    out.weights.push_back(in.weights[j]);
  }
  return KnownPushforward{out, dm->depth};
}

// ---------------------------------------------------------------------------------------------

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace nlphase
