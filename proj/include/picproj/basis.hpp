#pragma once

#include "picproj/common.hpp"

#include <array>
#include <vector>

namespace picproj {

/// Number of P_k basis functions on a triangle.
constexpr int simplex_dim(int order) { return (order + 1) * (order + 2) / 2; }

/// Nodal Lagrange basis of P_k on the reference triangle with equispaced
/// nodes, evaluated in barycentric product form. Node j has integer
/// barycentric index (k - a - b, a, b) and sits at (a / k, b / k); nodes are
/// ordered by b, then a. Order 0 has one node at the centroid.
template <typename Scalar = double>
class LagrangeBasis {
 public:
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Gradients = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

  explicit LagrangeBasis(int order) : order_(order) {
    if (order < 0 || order > 6) throw InvalidArgument("Lagrange order must be in 0..6");
    for (int b = 0; b <= order; ++b) {
      for (int a = 0; a + b <= order; ++a) {
        index_.push_back({order - a - b, a, b});
        if (order == 0) {
          nodes_.emplace_back(Scalar(1) / Scalar(3), Scalar(1) / Scalar(3));
        } else {
          nodes_.emplace_back(Scalar(a) / Scalar(order), Scalar(b) / Scalar(order));
        }
      }
    }
  }

  int order() const { return order_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  /// Integer barycentric coordinates (summing to the order) of each node.
  const std::array<int, 3>& node_index(int j) const { return index_[j]; }

  Values values(const Point& xi) const {
    const Factors f = factors(xi);
    Values v(size());
    for (int j = 0; j < size(); ++j) {
      const auto& a = index_[j];
      v(j) = f.p[0][a[0]] * f.p[1][a[1]] * f.p[2][a[2]];
    }
    return v;
  }

  /// Row j holds the reference gradient of basis function j.
  Gradients gradients(const Point& xi) const {
    const Factors f = factors(xi);
    Gradients g(size(), 2);
    for (int j = 0; j < size(); ++j) {
      const auto& a = index_[j];
      const Scalar d0 = f.d[0][a[0]] * f.p[1][a[1]] * f.p[2][a[2]];
      const Scalar d1 = f.p[0][a[0]] * f.d[1][a[1]] * f.p[2][a[2]];
      const Scalar d2 = f.p[0][a[0]] * f.p[1][a[1]] * f.d[2][a[2]];
      // lambda = (1 - x - y, x, y)
      g(j, 0) = d1 - d0;
      g(j, 1) = d2 - d0;
    }
    return g;
  }

 private:
  // Silvester factors prod_{s < a} (k L - s) / (s + 1) and their derivatives
  // with respect to L, for each barycentric coordinate and a = 0..k.
  struct Factors {
    std::array<std::array<Scalar, 7>, 3> p;
    std::array<std::array<Scalar, 7>, 3> d;
  };

  Factors factors(const Point& xi) const {
    const Scalar lambda[3] = {Scalar(1) - xi.x() - xi.y(), xi.x(), xi.y()};
    const Scalar k = Scalar(order_);
    Factors f;
    for (int m = 0; m < 3; ++m) {
      f.p[m][0] = Scalar(1);
      f.d[m][0] = Scalar(0);
      for (int a = 1; a <= order_; ++a) {
        const Scalar factor = (k * lambda[m] - Scalar(a - 1)) / Scalar(a);
        f.d[m][a] = f.d[m][a - 1] * factor + f.p[m][a - 1] * k / Scalar(a);
        f.p[m][a] = f.p[m][a - 1] * factor;
      }
    }
    return f;
  }

  int order_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> index_;
};

/// Nodal Lagrange basis of P_k on [0, 1] with equispaced nodes j / k
/// (a single node at 1/2 for order 0).
template <typename Scalar = double>
class LineBasis {
 public:
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit LineBasis(int order) : order_(order) {
    if (order < 0) throw InvalidArgument("line basis order must be non-negative");
    if (order == 0) {
      nodes_.push_back(Scalar(0.5));
    } else {
      for (int j = 0; j <= order; ++j) nodes_.push_back(Scalar(j) / Scalar(order));
    }
  }

  int order() const { return order_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Scalar>& nodes() const { return nodes_; }

  Values values(Scalar s) const {
    const int n = size();
    Values v(n);
    for (int j = 0; j < n; ++j) {
      Scalar p = 1;
      for (int m = 0; m < n; ++m) {
        if (m != j) p *= (s - nodes_[m]) / (nodes_[j] - nodes_[m]);
      }
      v(j) = p;
    }
    return v;
  }

 private:
  int order_;
  std::vector<Scalar> nodes_;
};

}  // namespace picproj
