#include "nlphase/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>

namespace nlphase {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      // Recompute the derivative at the converged node.
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = (n == 1) ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

const KronrodPair& gauss_kronrod_15() {
  // QUADPACK qk15 abscissae and weights.
  static const KronrodPair pair = [] {
    constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
    KronrodPair p{};
    for (int i = 0; i < 7; ++i) {
      p.nodes[static_cast<std::size_t>(i)] = -xgk[i];
      p.nodes[static_cast<std::size_t>(14 - i)] = xgk[i];
      p.kronrod_weights[static_cast<std::size_t>(i)] = wgk[i];
      p.kronrod_weights[static_cast<std::size_t>(14 - i)] = wgk[i];
    }
    p.nodes[7] = 0.0;
    p.kronrod_weights[7] = wgk[7];
    // Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7].
    for (int j = 0; j < 3; ++j) {
      const int i = 2 * j + 1;
      p.gauss_weights[static_cast<std::size_t>(i)] = wg[j];
      p.gauss_weights[static_cast<std::size_t>(14 - i)] = wg[j];
    }
    p.gauss_weights[7] = wg[3];
    return p;
  }();
  return pair;
}

Estimate integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                            int max_intervals) {
  const KronrodPair& gk = gauss_kronrod_15();
  struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
  };
  auto evaluate = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double k = 0.0;
    double g = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
      const double v = f(c + h * gk.nodes[i]);
      if (!std::isfinite(v)) throw QuadratureError("non-finite integrand value at x=" + std::to_string(c + h * gk.nodes[i]));
      k += gk.kronrod_weights[i] * v;
      g += gk.gauss_weights[i] * v;
    }
    return Interval{lo, hi, k * h, std::abs((k - g) * h)};
  };

  std::priority_queue<Interval> queue;
  Interval first = evaluate(a, b);
  double total = first.value;
  double error = first.error;
  queue.push(first);
  int count = 1;
  while (error > abs_tol && count < max_intervals) {
    Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Interval left = evaluate(worst.a, mid);
    Interval right = evaluate(mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double value = 0.0;
  double err = 0.0;
  while (!queue.empty()) {
    value += queue.top().value;
    err += queue.top().error;
    queue.pop();
  }
  return {value, err, count};
}

void validate(const QuadratureSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TensorGauss>) {
          if (s.order < 2) throw DomainError("tensor-gauss order must be >= 2");
          if (s.panels < 1 || s.max_panels < s.panels) throw DomainError("tensor-gauss panels must satisfy 1 <= panels <= max_panels");
          if (!(s.tol > 0.0)) throw DomainError("tensor-gauss tol must be > 0");
        } else if constexpr (std::is_same_v<T, MonteCarlo>) {
          if (s.samples < 2) throw DomainError("monte-carlo needs at least 2 samples");
        } else if constexpr (std::is_same_v<T, DigitScheme>) {
          if (s.depth < 1) throw DomainError("digit depth must be >= 1");
          if (s.max_nodes < 4) throw DomainError("digit max_nodes must be >= 4");
        } else {
          if (!(s.abs_tol > 0.0)) throw DomainError("adaptive abs_tol must be > 0");
          if (s.max_subdivisions < 1) throw DomainError("adaptive max_subdivisions must be >= 1");
        }
      },
      spec);
}

std::string scheme_name(const QuadratureSpec& spec) {
  static constexpr const char* kNames[] = {"tensor_gauss", "monte_carlo", "digit", "adaptive"};
  return kNames[spec.index()];
}

double QuadratureRule::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

}  // namespace nlphase
