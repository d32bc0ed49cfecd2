#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlphase {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Point outside a map's domain, or an invalid argument to a mathematical operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Quadrature did not reach the requested accuracy, or hit a non-finite integrand value.
class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A flat list of points in R^dim, stored row-major.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;

  PointSet() = default;
  PointSet(int d, std::size_t n) : dim(d), coords(static_cast<std::size_t>(d) * n, 0.0) {}

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / static_cast<std::size_t>(dim); }
  bool empty() const { return coords.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  Vec point(std::size_t i) const {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
    return v;
  }
  void push_back(std::span<const double> p) { coords.insert(coords.end(), p.begin(), p.end()); }
};

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline Vec to_vec(std::span<const double> s) {
  Vec v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = s[i];
  return v;
}

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (int k = 0; k < dim(); ++k)
      if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
    return true;
  }
};

/// e^{2 pi i theta}, with theta reduced modulo 1 first.
inline Complex unit_phase(double theta) {
  const double r = theta - std::nearbyint(theta);
  return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

}  // namespace nlphase
