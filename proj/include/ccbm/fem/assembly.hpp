#pragma once

#include <complex>
#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ccbm/fem/dofmap.hpp"
#include "ccbm/fem/field.hpp"
#include "ccbm/fem/sparse_solver.hpp"

namespace ccbm::fem {

/// Where a boundary trace is evaluated. theta is the polar angle of x in [0, 2pi).
struct BoundaryPoint {
  BoundaryTag tag = BoundaryTag::sigma;
  double theta = 0.0;
  Point x = Point::Zero();
  /// Outward unit normal of the flow domain on the discrete edge.
  Point normal = Point::Zero();
};

using BoundaryTraceFn = std::function<Eigen::Vector2cd(const BoundaryPoint&)>;
using BodyForceFn = std::function<Eigen::Vector2d(const Point&)>;

/// Real unconstrained blocks of the Taylor-Hood discretization.
struct StokesBlocks {
  /// alpha * grad:grad on the velocity space (both components).
  Eigen::SparseMatrix<double> stiffness;
  /// B(m, k) = -int psi_m div phi_k, pressure rows by velocity columns.
  Eigen::SparseMatrix<double> divergence;
  /// P2 velocity mass on the outer boundary.
  Eigen::SparseMatrix<double> sigma_mass;
  /// P2 velocity mass on the domain.
  Eigen::SparseMatrix<double> velocity_mass;
  /// P1 pressure mass on the domain.
  Eigen::SparseMatrix<double> pressure_mass;
};

StokesBlocks assemble_blocks(const TriangleMesh& mesh, const DofMap& dofs, double alpha);

/// Velocity load vector of int_tag h . phi over the boundary edges with the given tag.
Eigen::VectorXcd boundary_load(const TriangleMesh& mesh, const DofMap& dofs, BoundaryTag tag, const BoundaryTraceFn& h);

/// Velocity load vector of int_Omega b . phi.
Eigen::VectorXd body_load(const TriangleMesh& mesh, const DofMap& dofs, const BodyForceFn& b);

/// Saddle-point matrix [[A, B^T], [B, 0]] with the velocity rows and columns
/// of constrained dofs replaced by identity (symmetric elimination).
template <class Scalar>
Eigen::SparseMatrix<Scalar> saddle_matrix(const Eigen::SparseMatrix<Scalar>& velocity_block,
                                          const Eigen::SparseMatrix<double>& divergence, const DofMap& dofs,
                                          bool eliminate = true);

/// CCBM state: [[K + i M_Sigma, B^T], [B, 0]], load int_Sigma (g + i f) . phi.
ComplexSystem assemble_ccbm_state(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const BoundaryTraceFn& f,
                                  const BoundaryTraceFn& g);

/// Mixed Dirichlet-Neumann problem: real [[K, B^T], [B, 0]], load int_Sigma Re(g) . phi
/// plus an optional body force.
RealSystem assemble_mixed_neumann(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const BoundaryTraceFn& g,
                                  const BodyForceFn& body = {});

/// CCBM adjoint: [[K - i M_Sigma, B^T], [B, 0]], loads int u_i . psi and (mu, p_i).
ComplexSystem assemble_ccbm_adjoint(const TriangleMesh& mesh, const DofMap& dofs, double alpha,
                                    const Eigen::VectorXd& u_i, const Eigen::VectorXd& p_i);

/// Adjoint right-hand side from precomputed blocks.
Eigen::VectorXcd adjoint_rhs(const StokesBlocks& blocks, const DofMap& dofs, const Eigen::VectorXd& u_i,
                             const Eigen::VectorXd& p_i);

/// Zeroes constrained entries and stacks velocity and pressure parts.
Eigen::VectorXcd stack_rhs(const DofMap& dofs, const Eigen::VectorXcd& velocity, const Eigen::VectorXcd& pressure);

ComplexStokesField split_solution(const DofMap& dofs, const Eigen::VectorXcd& x);
RealStokesField split_solution(const DofMap& dofs, const Eigen::VectorXd& x);

/// Factor, solve and split. Throws SolverError.
ComplexStokesField solve_sparse(const ComplexSystem& system, const DofMap& dofs);
RealStokesField solve_sparse(const RealSystem& system, const DofMap& dofs);

}  // namespace ccbm::fem
