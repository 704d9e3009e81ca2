#include <cmath>
#include <memory>

#include "ccbm/errors.hpp"
#include "ccbm/fem/quadrature.hpp"
#include "ccbm/inverse/ccbm.hpp"

namespace ccbm::inverse {

CcbmData make_ccbm_data(const data::CauchyData& data, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  auto interp = std::make_shared<const data::TraceInterpolant>(data);
  CcbmData out;
  out.alpha = alpha;
  out.f = [interp](const fem::BoundaryPoint& p) -> Eigen::Vector2cd { return (*interp)(p.theta).cast<fem::Complex>(); };
  out.g = data.g_rule.function();
  return out;
}

CostBreakdown evaluate_cost(const TriangleMesh& mesh, const fem::DofMap& dofs, const fem::ComplexStokesField& state) {
  dofs.check_mesh(mesh);
  CostBreakdown c;
  c.u_i_norm_sq = fem::velocity_l2_norm_sq(mesh, dofs, state.velocity.imag().cast<fem::Complex>());
  c.p_i_norm_sq = fem::pressure_l2_norm_sq(mesh, state.pressure.imag().cast<fem::Complex>());
  c.J = 0.5 * (c.u_i_norm_sq + c.p_i_norm_sq);
  return c;
}

Evaluation evaluate(const TriangleMesh& mesh, const CcbmData& data, bool with_adjoint) {
  Evaluation ev;
  ev.dofs = fem::build_dofmap(mesh);
  ev.blocks = fem::assemble_blocks(mesh, ev.dofs, data.alpha);
  const Eigen::SparseMatrix<fem::Complex> a =
      ev.blocks.stiffness.cast<fem::Complex>() + fem::Complex(0.0, 1.0) * ev.blocks.sigma_mass.cast<fem::Complex>();
  const Eigen::VectorXcd load = fem::boundary_load(mesh, ev.dofs, geometry::BoundaryTag::sigma, data.g) +
                                fem::Complex(0.0, 1.0) * fem::boundary_load(mesh, ev.dofs, geometry::BoundaryTag::sigma, data.f);
  const fem::ComplexLU lu(fem::saddle_matrix(a, ev.blocks.divergence, ev.dofs));
  ev.state = fem::split_solution(
      ev.dofs, lu.solve(fem::stack_rhs(ev.dofs, load, Eigen::VectorXcd::Zero(ev.dofs.num_pressure_dofs()))));
  ev.cost = evaluate_cost(mesh, ev.dofs, ev.state);
  if (with_adjoint) {
    // The adjoint matrix is the complex conjugate of the state matrix.
    const Eigen::VectorXcd rhs =
        fem::adjoint_rhs(ev.blocks, ev.dofs, ev.state.velocity.imag(), ev.state.pressure.imag());
    ev.adjoint = fem::split_solution(ev.dofs, lu.solve_conjugate(rhs));
  }
  return ev;
}

double evaluate_ls_cost_diagnostic(const TriangleMesh& mesh, double alpha, const data::CauchyData& data) {
  const fem::DofMap dofs = fem::build_dofmap(mesh);
  const fem::RealStokesField un =
      fem::solve_sparse(fem::assemble_mixed_neumann(mesh, dofs, alpha, data.g_rule.function()), dofs);
  const data::TraceInterpolant f(data);
  const fem::EdgeRule& rule = fem::edge_rule_gauss3();
  double sum = 0.0;
  for (const auto& e : dofs.boundary) {
    if (e.tag != geometry::BoundaryTag::sigma) continue;
    const geometry::Point& xa = mesh.vertices[static_cast<std::size_t>(e.a)];
    const geometry::Point d = mesh.vertices[static_cast<std::size_t>(e.b)] - xa;
    const std::array<int, 3> nodes{e.a, e.mid, e.b};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto n = fem::p2_edge_values(rule.points[q]);
      Eigen::Vector2d u = Eigen::Vector2d::Zero();
      for (int i = 0; i < 3; ++i) {
        for (int c = 0; c < 2; ++c) u[c] += n[static_cast<std::size_t>(i)] * un.velocity[fem::DofMap::velocity_dof(nodes[static_cast<std::size_t>(i)], c)];
      }
      const geometry::Point x = xa + rule.points[q] * d;
      double th = std::atan2(x.y(), x.x());
      if (th < 0.0) th += 2.0 * M_PI;
      sum += rule.weights[q] * d.norm() * (u - f(th)).squaredNorm();
    }
  }
  return 0.5 * sum;
}

}  // namespace ccbm::inverse
