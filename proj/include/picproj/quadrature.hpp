#pragma once

#include "picproj/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace picproj {

template <typename Scalar>
struct QuadratureRule {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  std::vector<Point> points;
  std::vector<Scalar> weights;

  std::size_t size() const { return weights.size(); }
};

template <typename Scalar>
struct LineRule {
  std::vector<Scalar> points;  // on [0, 1]
  std::vector<Scalar> weights;

  std::size_t size() const { return weights.size(); }
};

namespace detail {

/// Legendre polynomial P_n and its derivative at x.
template <typename Scalar>
std::pair<Scalar, Scalar> legendre(int n, Scalar x) {
  Scalar p0 = 1;
  Scalar p1 = x;
  for (int k = 2; k <= n; ++k) {
    const Scalar p2 = (Scalar(2 * k - 1) * x * p1 - Scalar(k - 1) * p0) / Scalar(k);
    p0 = p1;
    p1 = p2;
  }
  return {p1, Scalar(n) * (x * p1 - p0) / (x * x - Scalar(1))};
}

}  // namespace detail

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact to degree 2n - 1.
template <typename Scalar = double>
LineRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs at least one point");
  using std::abs;
  using std::cos;
  LineRule<Scalar> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < n / 2; ++i) {
    Scalar x = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre(n, x);
      const Scalar dx = p / dp;
      x -= dx;
      if (abs(dx) <= 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    const Scalar dp = detail::legendre(n, x).second;
    const Scalar w = Scalar(1) / ((Scalar(1) - x * x) * dp * dp);
    rule.points[i] = (Scalar(1) - x) / Scalar(2);
    rule.points[n - 1 - i] = (Scalar(1) + x) / Scalar(2);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    const Scalar dp = detail::legendre(n, Scalar(0)).second;
    rule.points[n / 2] = Scalar(0.5);
    rule.weights[n / 2] = Scalar(1) / (dp * dp);
  }
  return rule;
}

/// Rule on [0, 1] exact for polynomials of the given degree.
template <typename Scalar = double>
LineRule<Scalar> facet_quadrature(int degree) {
  return gauss_legendre<Scalar>(std::max(degree, 0) / 2 + 1);
}

/// Rule on the reference triangle {(x, y) : x, y >= 0, x + y <= 1} exact to
/// `degree` (<= 10). Built from a collapsed tensor Gauss rule and averaged over
/// the six vertex permutations, so it is invariant under the triangle's
/// symmetry group and all weights are positive. Weights sum to 1/2.
template <typename Scalar = double>
QuadratureRule<Scalar> cell_quadrature(int degree) {
  if (degree < 0 || degree > 10) throw InvalidArgument("cell quadrature supports degrees 0..10");
  const int n = (degree + 3) / 2;
  const auto line = gauss_legendre<Scalar>(n);
  QuadratureRule<Scalar> rule;
  rule.points.reserve(6 * n * n);
  rule.weights.reserve(6 * n * n);
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Scalar u = line.points[i];
      const Scalar v = line.points[j];
      const Scalar x = u;
      const Scalar y = v * (Scalar(1) - u);
      const Scalar w = line.weights[i] * line.weights[j] * (Scalar(1) - u);
      const Scalar bary[3] = {Scalar(1) - x - y, x, y};
      for (const auto& p : perms) {
        rule.points.emplace_back(bary[p[1]], bary[p[2]]);
        rule.weights.push_back(w / Scalar(6));
      }
    }
  }
  return rule;
}

}  // namespace picproj
