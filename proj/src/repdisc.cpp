#include "nlphase/repdisc.hpp"

#include <cmath>
#include <limits>

#include "nlphase/kernels.hpp"
#include "nlphase/measure.hpp"
#include "nlphase/rng.hpp"

namespace nlphase {

namespace {

Mat unit(int d, int i, int j) {
  Mat m = Mat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

bool in_half_open(const Box& b, const Vec& x) {
  for (int k = 0; k < b.dim(); ++k)
    if (!(x[k] >= b.lo[k] && x[k] < b.hi[k])) return false;
  return true;
}

Box shifted(const Box& b, const Vec& g) { return Box{b.lo + g, b.hi + g}; }

bool overlaps(const Box& a, const Box& b) {
  for (int k = 0; k < a.dim(); ++k)
    if (a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) return false;
  return true;
}

bool contains_box(const Box& outer, const Box& inner) {
  for (int k = 0; k < outer.dim(); ++k)
    if (inner.lo[k] < outer.lo[k] || inner.hi[k] > outer.hi[k]) return false;
  return true;
}

}  // namespace

void validate(const GroupData& g) {
  if (g.A.empty()) throw DomainError("group: need at least one generator");
  for (const Mat& a : g.A)
    if (a.rows() != g.d() || a.cols() != g.d()) throw DomainError("group: generators must be d x d with d = |ell|");
  for (std::size_t i = 0; i < g.A.size(); ++i)
    for (std::size_t j = i + 1; j < g.A.size(); ++j)
      if ((g.A[i] * g.A[j] - g.A[j] * g.A[i]).cwiseAbs().maxCoeff() > 1e-12)
        throw DomainError("group: generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                          " do not commute");
}

PhaseMap phase_from_group(const GroupData& g) {
  validate(g);
  return PhaseMap::group_exp(g.A, g.ell);
}

GroupData group_preset(const std::string& name) {
  GroupData g;
  if (name == "heisenberg") {
    g.A = {unit(2, 0, 1)};
    g.ell = Vec::Unit(2, 0);
  } else if (name == "poly2d") {
    g.A = {unit(3, 0, 1) + unit(3, 1, 2), unit(3, 0, 2)};
    g.ell = Vec::Unit(3, 0);
  } else if (name == "axb") {
    g.A = {Mat::Identity(1, 1)};
    g.ell = Vec::Ones(1);
  } else if (name == "shearlet") {
    g.A = {Mat::Identity(2, 2), unit(2, 0, 1)};
    g.ell = Vec::Unit(2, 0);
  } else {
    throw DomainError("unknown group preset '" + name + "'");
  }
  return g;
}

std::vector<std::string> group_preset_names() { return {"heisenberg", "poly2d", "axb", "shearlet"}; }

void validate(const WindowSystem& ws) {
  const int m = ws.omega.dim();
  if (ws.phi.in_dim() != m) throw DomainError("window system: phase input dimension differs from Omega");
  if (ws.spectrum.dim() != ws.phi.out_dim()) throw DomainError("window system: spectrum dimension differs from phase");
  if (ws.gammas.empty()) throw DomainError("window system: empty translation set");
  for (const Vec& g : ws.gammas)
    if (g.size() != m) throw DomainError("window system: translation of wrong dimension");
  for (std::size_t i = 0; i < ws.gammas.size(); ++i)
    for (std::size_t j = i + 1; j < ws.gammas.size(); ++j)
      if (overlaps(shifted(ws.omega, ws.gammas[i]), shifted(ws.omega, ws.gammas[j])))
        throw DomainError("window system: translates " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
}

Complex atom(const WindowSystem& ws, std::size_t a, std::size_t g, const Vec& s) {
  const Vec u = s - ws.gammas.at(g);
  if (!in_half_open(ws.omega, u)) return {0.0, 0.0};
  const Vec y = ws.phi(u);
  double dot = 0.0;
  for (int k = 0; k < y.size(); ++k) dot += ws.spectrum.points[a][k] * y[k];
  return unit_phase(dot);
}

Complex group_action(const PhaseMap& phi, const Box& omega, const Vec& x, const Vec& t, const Vec& s) {
  if (!in_half_open(omega, s - t)) return {0.0, 0.0};
  return unit_phase(phi(s).dot(x));
}

RepdiscReport verify_system_on_window(const WindowSystem& ws, const Box& window, const QuadratureSpec& quad,
                                      const RepdiscOptions& options) {
  validate(ws);
  if (window.dim() != ws.omega.dim()) throw DomainError("repdisc: window dimension differs from Omega");

  std::vector<std::size_t> inside;
  double covered = 0.0;
  for (std::size_t i = 0; i < ws.gammas.size(); ++i) {
    const Box b = shifted(ws.omega, ws.gammas[i]);
    if (contains_box(window, b)) {
      inside.push_back(i);
      covered += b.volume();
    } else if (overlaps(window, b)) {
      throw DomainError("repdisc: window cuts through a translate of Omega");
    }
  }
  if (inside.empty() || std::abs(covered - window.volume()) > 1e-12 * window.volume())
    throw DomainError("repdisc: window is not a union of translates of Omega");

  RepdiscReport report;
  report.mode = options.mode;
  report.scope = "windowed verification on the union of " + std::to_string(inside.size()) +
                 " translates; no statement about the full space";
  report.blocks.resize(inside.size());
  const int m = ws.omega.dim();
  for (std::size_t b = 0; b < inside.size(); ++b) {
    const Vec& g = ws.gammas[inside[b]];
    const Measure mu = Measure::lebesgue_box(ws.omega.lo + g, ws.omega.hi + g);
    const PhaseMap shifted_phi = PhaseMap::compose(ws.phi, PhaseMap::affine(Mat::Identity(m, m), -g));
    BlockReport& br = report.blocks[b];
    br.gamma = g;
    if (options.mode == RepMode::Onb) {
      const GramReport gr = gram(mu, shifted_phi, ws.spectrum, quad, options.gram);
      br.max_offdiag = gr.max_offdiag;
      br.diag_dev = gr.diag_dev;
      br.quad_error = gr.quad_error;
    } else {
      const FrameBoundsReport fr = frame_bounds(mu, shifted_phi, ws.spectrum, quad, options.frame);
      br.A = fr.A;
      br.B = fr.B;
      br.quad_error = fr.quad_error;
    }
  }

  report.min_A = std::numeric_limits<double>::infinity();
  for (const BlockReport& br : report.blocks) {
    report.max_offdiag = std::max(report.max_offdiag, br.max_offdiag);
    report.max_diag_dev = std::max(report.max_diag_dev, br.diag_dev);
    report.quad_error = std::max(report.quad_error, br.quad_error);
    report.min_A = std::min(report.min_A, br.A);
    report.max_B = std::max(report.max_B, br.B);
  }

  // Products of atoms from different translates vanish pointwise.
  if (inside.size() > 1 && options.cross_samples > 0) {
    CounterRng rng(split_stream(options.seed, 0xC055));
    for (std::size_t i = 0; i < options.cross_samples; ++i) {
      Vec s(m);
      for (int k = 0; k < m; ++k) s[k] = rng.uniform(window.lo[k], window.hi[k]);
      const std::size_t a = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ws.spectrum.size()));
      const std::size_t a2 = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ws.spectrum.size()));
      const std::size_t nb = inside.size();
      const std::size_t p1 = static_cast<std::size_t>(rng.uniform() * static_cast<double>(nb));
      const std::size_t p2 = (p1 + 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(nb - 1))) % nb;
      const std::size_t g1 = inside[p1];
      const std::size_t g2 = inside[p2];
      report.cross_block_max =
          std::max(report.cross_block_max, std::abs(atom(ws, a, g1, s) * std::conj(atom(ws, a2, g2, s))));
    }
  }

  if (options.mode == RepMode::Onb) {
    const double dev = std::max(report.max_offdiag, report.max_diag_dev);
    if (dev <= options.tol && report.cross_block_max == 0.0) report.verdict = Verdict::Pass;
    else if (dev > options.tol + report.quad_error || report.cross_block_max > 0.0) report.verdict = Verdict::Fail;
    else report.verdict = Verdict::Inconclusive;
  } else {
    const bool bounded = std::isfinite(report.max_B) && report.max_B > 0.0;
    report.verdict = (report.min_A > 0.0 && bounded && report.cross_block_max == 0.0) ? Verdict::Pass : Verdict::Fail;
  }
  return report;
}

double pushforward_ks(const PhaseMap& phi, const Box& omega, const std::function<double(double)>& cdf, std::size_t n,
                      std::uint64_t seed) {
  if (omega.dim() != 1 || phi.in_dim() != 1 || phi.out_dim() != 1)
    throw DomainError("pushforward_ks: needs a scalar phase on an interval");
  const PointSet xs = sample(Measure::lebesgue_box(omega.lo, omega.hi), n, seed);
  const PointSet ys = kernels::map_points(phi, xs);
  return ks_distance(std::vector<double>(ys.coords.begin(), ys.coords.end()), cdf);
}

}  // namespace nlphase
