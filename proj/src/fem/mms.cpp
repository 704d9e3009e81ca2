#include "ccbm/fem/mms.hpp"

#include <cmath>

#include "ccbm/errors.hpp"
#include "ccbm/fem/assembly.hpp"
#include "ccbm/fem/postprocess.hpp"
#include "ccbm/fem/quadrature.hpp"
#include "ccbm/geometry/mesher.hpp"

namespace ccbm::fem {

namespace {

struct Values {
  double u0, u1, g00, g01, g10, g11, l0, l1, p, px, py;
};

// Generated with sympy (common subexpressions eliminated).
Values evaluate(const Point& pt) {
  using std::cos;
  using std::pow;
  using std::sin;
  const double x = pt.x(), y = pt.y();
  Values s{};
  const double x0 = pow(x, 2);
  const double x1 = pow(y, 2);
  const double x2 = 4 * x0 + 4 * x1 - 1;
  const double x3 = pow(x2, 2);
  const double x4 = 2 * x + y;
  const double x5 = sin(x4);
  const double x6 = x5 + 1;
  const double x7 = 24 * x6;
  const double x8 = x7 * y;
  const double x9 = cos(x4);
  const double x10 = x2 * x9;
  const double x11 = 12 * x;
  const double x12 = x11 * x6;
  const double x13 = x * y;
  const double x14 = x10 * y;
  const double x15 = x3 * x5;
  const double x16 = -x15;
  const double x17 = x10 * x11 + 192 * x13 * x6 + 24 * x14 + x16;
  const double x18 = (1.0 / 16.0) * x0 + (1.0 / 16.0) * x1 - 1.0 / 64.0;
  const double x19 = 2 * x18;
  const double x20 = x0 * x6;
  const double x21 = 24 * x10;
  const double x22 = x0 * x10;
  const double x23 = x1 * x10;
  const double x24 = -5.0 / 64.0 * pow(x2, 3) * x9 + (3.0 / 2.0) * x3 * x9;
  const double x25 = sin(x);
  const double x26 = 2 * y;
  const double x27 = cos(x26);
  s.u0 = (1.0 / 64.0) * x3 * (x10 + x8);
  s.u1 = -1.0 / 32.0 * x3 * (x10 + x12);
  s.g00 = x17 * x19;
  s.g01 = x18 * (384 * x1 * x6 + 48 * x14 + x16 + x2 * x7);
  s.g10 = 2 * ((1.0 / 8.0) * x0 + (1.0 / 8.0) * x1 - 1.0 / 32.0) * (-x * x21 - x16 - 6 * x2 * x6 - 96 * x20);
  s.g11 = -x17 * x19;
  s.l0 = -3.0 / 2.0 * x * x15 + x13 * x21 - 21.0 / 8.0 * x15 * y + x2 * x8 + 48 * x20 * y + 6 * x22 + 18 * x23 + x24 +
         48 * x6 * pow(y, 3);
  s.l1 = -2 * pow(x, 3) * x7 - 2 * x * x1 * x7 + (39.0 / 8.0) * x * x3 * x5 - 12 * x10 * x13 - 2 * x12 * x2 - 36 * x22 -
         12 * x23 - 2 * x24 + (3.0 / 2.0) * x3 * x5 * y;
  s.p = x13 + x25 * x27;
  s.px = x27 * cos(x) + y;
  s.py = x - 2 * x25 * sin(x26);
  return s;
}

ElementGeometry geometry_of(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  return {mesh.vertices[static_cast<std::size_t>(tri[0])], mesh.vertices[static_cast<std::size_t>(tri[1])],
          mesh.vertices[static_cast<std::size_t>(tri[2])]};
}

double max_edge_length(const TriangleMesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, (mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] -
                       mesh.vertices[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])])
                          .norm());
    }
  }
  return h;
}

}  // namespace

ExactStokes annulus_manufactured_solution() {
  ExactStokes e;
  e.u = [](const Point& x) {
    const Values s = evaluate(x);
    return Eigen::Vector2d(s.u0, s.u1);
  };
  e.grad_u = [](const Point& x) {
    const Values s = evaluate(x);
    Eigen::Matrix2d g;
    g << s.g00, s.g01, s.g10, s.g11;
    return g;
  };
  e.laplacian_u = [](const Point& x) {
    const Values s = evaluate(x);
    return Eigen::Vector2d(s.l0, s.l1);
  };
  e.p = [](const Point& x) { return evaluate(x).p; };
  e.grad_p = [](const Point& x) {
    const Values s = evaluate(x);
    return Eigen::Vector2d(s.px, s.py);
  };
  return e;
}

MmsErrors mms_errors(const TriangleMesh& mesh, const DofMap& dofs, const RealStokesField& field,
                     const ExactStokes& exact) {
  dofs.check_mesh(mesh);
  const TriangleRule& rule = triangle_rule_degree5();
  const Eigen::VectorXcd vel = field.velocity.cast<Complex>();
  const Eigen::VectorXcd pre = field.pressure.cast<Complex>();
  double eu = 0.0, eg = 0.0, ep = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = geometry_of(mesh, t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Bary& l = rule.points[q];
      const Point x = g.point(l);
      const double w = rule.weights[q] * g.area;
      eu += w * (velocity_at(dofs, vel, t, l).real() - exact.u(x)).squaredNorm();
      eg += w * (velocity_gradient_at(mesh, dofs, vel, t, l).real() - exact.grad_u(x)).squaredNorm();
      const double dp = pressure_at(mesh, pre, t, l).real() - exact.p(x);
      ep += w * dp * dp;
    }
  }
  return {std::sqrt(eu), std::sqrt(eg), std::sqrt(ep)};
}

RealStokesField solve_manufactured(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const ExactStokes& exact) {
  const BoundaryTraceFn g = [&](const BoundaryPoint& bp) -> Eigen::Vector2cd {
    const Eigen::Vector2d t = alpha * exact.grad_u(bp.x) * bp.normal - exact.p(bp.x) * bp.normal;
    return t.cast<Complex>();
  };
  const BodyForceFn body = [&](const Point& x) -> Eigen::Vector2d {
    return -alpha * exact.laplacian_u(x) + exact.grad_p(x);
  };
  return solve_sparse(assemble_mixed_neumann(mesh, dofs, alpha, g, body), dofs);
}

MmsStudy run_mms_study(int refinements, int sigma_nodes, int gamma_nodes, double alpha) {
  if (refinements < 1) throw ArgumentError("mms study needs at least one refinement");
  const geometry::BoundaryCurve hole = geometry::BoundaryCurve::circle(0.0, 0.0, 0.5);
  geometry::MeshOptions opt;
  opt.sigma_nodes = sigma_nodes;
  opt.gamma_nodes = gamma_nodes;
  TriangleMesh mesh = geometry::generate_annulus_mesh(std::span(&hole, 1), opt);
  const geometry::BoundarySnap snap = [](const Point& p, BoundaryTag tag, int) -> Point {
    return p.normalized() * (tag == BoundaryTag::sigma ? 1.0 : 0.5);
  };
  const ExactStokes exact = annulus_manufactured_solution();
  MmsStudy study;
  for (int level = 0; level <= refinements; ++level) {
    if (level > 0) mesh = geometry::refine_uniform(mesh, snap);
    const DofMap dofs = build_dofmap(mesh);
    const RealStokesField field = solve_manufactured(mesh, dofs, alpha, exact);
    study.levels.push_back({mesh.num_triangles(), max_edge_length(mesh), mms_errors(mesh, dofs, field, exact)});
  }
  for (std::size_t k = 0; k + 1 < study.levels.size(); ++k) {
    const auto& a = study.levels[k];
    const auto& b = study.levels[k + 1];
    const double lh = std::log(a.h / b.h);
    study.rates.push_back({std::log(a.errors.velocity_l2 / b.errors.velocity_l2) / lh,
                           std::log(a.errors.velocity_h1 / b.errors.velocity_h1) / lh,
                           std::log(a.errors.pressure_l2 / b.errors.pressure_l2) / lh});
  }
  return study;
}

}  // namespace ccbm::fem
