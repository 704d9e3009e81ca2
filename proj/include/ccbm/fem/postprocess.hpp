#pragma once

#include <vector>

#include <Eigen/Core>

#include "ccbm/fem/dofmap.hpp"
#include "ccbm/fem/element.hpp"
#include "ccbm/fem/field.hpp"

namespace ccbm::fem {

Eigen::Vector2cd velocity_at(const DofMap& dofs, const Eigen::VectorXcd& velocity, int triangle, const Bary& l);
/// (row c, column d) = d u_c / d x_d.
Eigen::Matrix2cd velocity_gradient_at(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity,
                                      int triangle, const Bary& l);
Complex pressure_at(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure, int triangle, const Bary& l);

/// Closed-loop integral of u . n over the edges with the given tag (3-point Gauss
/// per edge on the quadratic trace). Throws ArgumentError if no edge has the tag.
Complex boundary_integral_flux(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity,
                               BoundaryTag tag);

enum class TractionForm {
  /// alpha (grad u + grad u^T) n - p n
  symmetric,
  /// alpha (grad u) n - p n, the natural boundary operator of the grad:grad form
  gradient,
};

struct BoundarySample {
  /// Index into DofMap::boundary.
  int edge = 0;
  Point x = Point::Zero();
  Point normal = Point::Zero();
  /// Quadrature weight including the edge length.
  double weight = 0.0;
  Eigen::Vector2cd traction = Eigen::Vector2cd::Zero();
  Eigen::Vector2cd normal_derivative = Eigen::Vector2cd::Zero();
  Complex pressure = 0.0;
};

/// Traction and (grad u) n at the 3 Gauss points of every edge with the given
/// tag, evaluated from the single triangle owning the edge. Throws
/// ArgumentError if no edge has the tag.
std::vector<BoundarySample> boundary_stress_and_normal_derivative(const TriangleMesh& mesh, const DofMap& dofs,
                                                                  double alpha, const Eigen::VectorXcd& velocity,
                                                                  const Eigen::VectorXcd& pressure, BoundaryTag tag,
                                                                  TractionForm form = TractionForm::symmetric);

/// Boundary traction recovered from the weak-form residual: solves
/// M_tag t = residual restricted to the P2 nodes of the tagged edges, one
/// system per component. residual is velocity-sized (the velocity rows of
/// A x - b before constraints); the result is velocity-sized and zero off the
/// tagged nodes. Throws ArgumentError if no edge has the tag.
Eigen::VectorXcd recover_boundary_traction(const TriangleMesh& mesh, const DofMap& dofs,
                                           const Eigen::VectorXcd& residual, BoundaryTag tag);

/// Quadratic trace of a velocity-sized nodal vector at parameter s of boundary edge `edge`.
Eigen::Vector2cd boundary_trace_at(const DofMap& dofs, const Eigen::VectorXcd& values, int edge, double s);

/// Domain integrals by quadrature.
double velocity_l2_norm_sq(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity);
double velocity_h1_seminorm_sq(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity);
double pressure_l2_norm_sq(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure);
Complex pressure_integral(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure);
double domain_area(const TriangleMesh& mesh);

/// Nodal interpolant of a vector function in the P2 space.
Eigen::VectorXd interpolate_velocity(const DofMap& dofs, const std::function<Eigen::Vector2d(const Point&)>& u);
/// Nodal interpolant of a scalar function in the P1 space.
Eigen::VectorXd interpolate_pressure(const TriangleMesh& mesh, const std::function<double(const Point&)>& p);

}  // namespace ccbm::fem
