#pragma once

// Affine P1 and P2 Lagrange shape functions on triangles. Local P2 nodes:
// 0..2 vertices, 3 = edge(0,1), 4 = edge(1,2), 5 = edge(2,0).

#include <array>

#include <Eigen/Core>

namespace ccbm::fem {

using Vec2 = Eigen::Vector2d;
using Bary = std::array<double, 3>;

inline constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {1, 2}, {2, 0}}};

struct ElementGeometry {
  double area = 0.0;
  /// Row i holds grad(lambda_i).
  Eigen::Matrix<double, 3, 2> grad_lambda;
  std::array<Vec2, 3> x;

  ElementGeometry(const Vec2& x0, const Vec2& x1, const Vec2& x2) : x{x0, x1, x2} {
    const double det = (x1 - x0).x() * (x2 - x0).y() - (x1 - x0).y() * (x2 - x0).x();
    area = 0.5 * det;
    grad_lambda << x1.y() - x2.y(), x2.x() - x1.x(), x2.y() - x0.y(), x0.x() - x2.x(), x0.y() - x1.y(),
        x1.x() - x0.x();
    grad_lambda /= det;
  }

  [[nodiscard]] Vec2 point(const Bary& l) const { return l[0] * x[0] + l[1] * x[1] + l[2] * x[2]; }
};

inline std::array<double, 6> p2_values(const Bary& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
}

/// Row k holds grad(N_k).
inline Eigen::Matrix<double, 6, 2> p2_gradients(const Bary& l, const ElementGeometry& g) {
  Eigen::Matrix<double, 6, 2> out;
  for (int i = 0; i < 3; ++i) out.row(i) = (4 * l[static_cast<std::size_t>(i)] - 1) * g.grad_lambda.row(i);
  for (int e = 0; e < 3; ++e) {
    const int a = kLocalEdges[static_cast<std::size_t>(e)][0];
    const int b = kLocalEdges[static_cast<std::size_t>(e)][1];
    out.row(3 + e) = 4 * (l[static_cast<std::size_t>(a)] * g.grad_lambda.row(b) +
                          l[static_cast<std::size_t>(b)] * g.grad_lambda.row(a));
  }
  return out;
}

/// 1D quadratic shape functions on an edge at s in [0, 1]: start, mid, end.
inline std::array<double, 3> p2_edge_values(double s) {
  return {(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
}

}  // namespace ccbm::fem
