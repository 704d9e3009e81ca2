#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ccbm/fem/dofmap.hpp"
#include "ccbm/fem/field.hpp"

namespace ccbm::fem {

/// Closed-form Stokes solution with derivatives.
struct ExactStokes {
  std::function<Eigen::Vector2d(const Point&)> u;
  /// (row c, column d) = d u_c / d x_d.
  std::function<Eigen::Matrix2d(const Point&)> grad_u;
  std::function<Eigen::Vector2d(const Point&)> laplacian_u;
  std::function<double(const Point&)> p;
  std::function<Eigen::Vector2d(const Point&)> grad_p;
};

/// Divergence-free field u = curl((|x|^2 - 1/4)^3 (1 + sin(2x + y))), which
/// vanishes to second order on the circle of radius 1/2, with
/// p = sin(x) cos(2y) + x y.
ExactStokes annulus_manufactured_solution();

struct MmsErrors {
  double velocity_l2 = 0.0;
  /// H1 seminorm of the velocity error.
  double velocity_h1 = 0.0;
  double pressure_l2 = 0.0;
};

/// Errors by 7-point quadrature on every triangle.
MmsErrors mms_errors(const TriangleMesh& mesh, const DofMap& dofs, const RealStokesField& field,
                     const ExactStokes& exact);

/// Solves the mixed Dirichlet-Neumann problem with body force -alpha lap u + grad p
/// and Neumann data alpha (grad u) n - p n on the discrete outer boundary.
RealStokesField solve_manufactured(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const ExactStokes& exact);

struct MmsLevel {
  int triangles = 0;
  double h = 0.0;
  MmsErrors errors;
};

struct MmsStudy {
  std::vector<MmsLevel> levels;
  /// Observed orders log(e_k / e_{k+1}) / log(h_k / h_{k+1}).
  std::vector<MmsErrors> rates;
};

/// Annulus 1 > |x| > 1/2, coarse mesh refined uniformly with boundary midpoints
/// projected onto the circles.
MmsStudy run_mms_study(int refinements = 3, int sigma_nodes = 32, int gamma_nodes = 16, double alpha = 1.0);

}  // namespace ccbm::fem
