#include "ccbm/fem/assembly.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ccbm/errors.hpp"
#include "ccbm/fem/element.hpp"
#include "ccbm/fem/quadrature.hpp"

namespace ccbm::fem {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be positive");
}

ElementGeometry geometry_of(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  return {mesh.vertices[static_cast<std::size_t>(tri[0])], mesh.vertices[static_cast<std::size_t>(tri[1])],
          mesh.vertices[static_cast<std::size_t>(tri[2])]};
}

double polar_angle(const Point& x) {
  double th = std::atan2(x.y(), x.x());
  if (th < 0.0) th += 2.0 * std::numbers::pi;
  return th;
}

// Calls fn(node triple (a, mid, b), length, normal, quadrature s, weight, point) for each edge quadrature point.
template <class Fn>
void for_each_edge_point(const TriangleMesh& mesh, const DofMap& dofs, BoundaryTag tag, Fn&& fn) {
  const EdgeRule& rule = edge_rule_gauss3();
  for (const auto& e : dofs.boundary) {
    if (e.tag != tag) continue;
    const Point& xa = mesh.vertices[static_cast<std::size_t>(e.a)];
    const Point& xb = mesh.vertices[static_cast<std::size_t>(e.b)];
    const Point d = xb - xa;
    const double len = d.norm();
    const Point normal(d.y() / len, -d.x() / len);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      fn(e, len, normal, s, rule.weights[q] * len, Point(xa + s * d));
    }
  }
}

Eigen::SparseMatrix<double> from_triplets(int rows, int cols, const std::vector<Triplet>& trips) {
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

StokesBlocks assemble_blocks(const TriangleMesh& mesh, const DofMap& dofs, double alpha) {
  check_alpha(alpha);
  dofs.check_mesh(mesh);
  const TriangleRule& rule = triangle_rule_degree4();
  const int nv = dofs.num_velocity_dofs();
  const int np = dofs.num_pressure_dofs();
  std::vector<Triplet> k_trips, b_trips, mv_trips, mp_trips, ms_trips;
  k_trips.reserve(static_cast<std::size_t>(dofs.num_triangles) * 72);
  b_trips.reserve(static_cast<std::size_t>(dofs.num_triangles) * 36);
  mv_trips.reserve(static_cast<std::size_t>(dofs.num_triangles) * 72);
  mp_trips.reserve(static_cast<std::size_t>(dofs.num_triangles) * 9);
  for (int t = 0; t < dofs.num_triangles; ++t) {
    const ElementGeometry g = geometry_of(mesh, t);
    if (!(g.area > 0.0)) throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 3, 6> bx = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix<double, 3, 6> by = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix3d mpe = Eigen::Matrix3d::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Bary& l = rule.points[q];
      const double w = rule.weights[q] * g.area;
      const auto n = p2_values(l);
      const Eigen::Matrix<double, 6, 2> dn = p2_gradients(l, g);
      const Eigen::Map<const Eigen::Matrix<double, 6, 1>> nv6(n.data());
      const Eigen::Vector3d lam(l[0], l[1], l[2]);
      ke.noalias() += w * dn * dn.transpose();
      me.noalias() += w * nv6 * nv6.transpose();
      bx.noalias() -= w * lam * dn.col(0).transpose();
      by.noalias() -= w * lam * dn.col(1).transpose();
      mpe.noalias() += w * lam * lam.transpose();
    }
    ke *= alpha;
    const auto& nodes = dofs.cell_nodes[static_cast<std::size_t>(t)];
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        for (int c = 0; c < 2; ++c) {
          const int r = DofMap::velocity_dof(nodes[static_cast<std::size_t>(i)], c);
          const int s = DofMap::velocity_dof(nodes[static_cast<std::size_t>(j)], c);
          k_trips.emplace_back(r, s, ke(i, j));
          mv_trips.emplace_back(r, s, me(i, j));
        }
      }
    }
    for (int m = 0; m < 3; ++m) {
      const int row = tri[static_cast<std::size_t>(m)];
      for (int j = 0; j < 6; ++j) {
        b_trips.emplace_back(row, DofMap::velocity_dof(nodes[static_cast<std::size_t>(j)], 0), bx(m, j));
        b_trips.emplace_back(row, DofMap::velocity_dof(nodes[static_cast<std::size_t>(j)], 1), by(m, j));
      }
      for (int j = 0; j < 3; ++j) mp_trips.emplace_back(row, tri[static_cast<std::size_t>(j)], mpe(m, j));
    }
  }
  const EdgeRule& erule = edge_rule_gauss3();
  for (const auto& e : dofs.boundary) {
    if (e.tag != BoundaryTag::sigma) continue;
    const double len = (mesh.vertices[static_cast<std::size_t>(e.b)] - mesh.vertices[static_cast<std::size_t>(e.a)]).norm();
    const std::array<int, 3> nodes{e.a, e.mid, e.b};
    Eigen::Matrix3d me = Eigen::Matrix3d::Zero();
    for (std::size_t q = 0; q < erule.points.size(); ++q) {
      const auto n = p2_edge_values(erule.points[q]);
      const Eigen::Vector3d v(n[0], n[1], n[2]);
      me.noalias() += erule.weights[q] * len * v * v.transpose();
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int c = 0; c < 2; ++c) {
          ms_trips.emplace_back(DofMap::velocity_dof(nodes[static_cast<std::size_t>(i)], c),
                                DofMap::velocity_dof(nodes[static_cast<std::size_t>(j)], c), me(i, j));
        }
      }
    }
  }
  StokesBlocks out;
  out.stiffness = from_triplets(nv, nv, k_trips);
  out.divergence = from_triplets(np, nv, b_trips);
  out.velocity_mass = from_triplets(nv, nv, mv_trips);
  out.pressure_mass = from_triplets(np, np, mp_trips);
  out.sigma_mass = from_triplets(nv, nv, ms_trips);
  return out;
}

Eigen::VectorXcd boundary_load(const TriangleMesh& mesh, const DofMap& dofs, BoundaryTag tag, const BoundaryTraceFn& h) {
  Eigen::VectorXcd load = Eigen::VectorXcd::Zero(dofs.num_velocity_dofs());
  if (!h) return load;
  for_each_edge_point(mesh, dofs, tag, [&](const BoundaryEdgeDofs& e, double, const Point& normal, double s, double w,
                                           const Point& x) {
    const Eigen::Vector2cd v = h(BoundaryPoint{tag, polar_angle(x), x, normal});
    const auto n = p2_edge_values(s);
    const std::array<int, 3> nodes{e.a, e.mid, e.b};
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) load[DofMap::velocity_dof(nodes[static_cast<std::size_t>(i)], c)] += w * n[static_cast<std::size_t>(i)] * v[c];
    }
  });
  return load;
}

Eigen::VectorXd body_load(const TriangleMesh& mesh, const DofMap& dofs, const BodyForceFn& b) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dofs.num_velocity_dofs());
  if (!b) return load;
  const TriangleRule& rule = triangle_rule_degree5();
  for (int t = 0; t < dofs.num_triangles; ++t) {
    const ElementGeometry g = geometry_of(mesh, t);
    const auto& nodes = dofs.cell_nodes[static_cast<std::size_t>(t)];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Eigen::Vector2d f = b(g.point(rule.points[q]));
      const auto n = p2_values(rule.points[q]);
      const double w = rule.weights[q] * g.area;
      for (int i = 0; i < 6; ++i) {
        for (int c = 0; c < 2; ++c) load[DofMap::velocity_dof(nodes[static_cast<std::size_t>(i)], c)] += w * n[static_cast<std::size_t>(i)] * f[c];
      }
    }
  }
  return load;
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> saddle_matrix(const Eigen::SparseMatrix<Scalar>& velocity_block,
                                          const Eigen::SparseMatrix<double>& divergence, const DofMap& dofs,
                                          bool eliminate) {
  const int nv = dofs.num_velocity_dofs();
  const int n = dofs.num_dofs();
  auto fixed = [&](int i) { return eliminate && dofs.constrained[static_cast<std::size_t>(i)] != 0; };
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<std::size_t>(velocity_block.nonZeros() + 2 * divergence.nonZeros() + nv));
  for (int k = 0; k < velocity_block.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(velocity_block, k); it; ++it) {
      const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (!fixed(r) && !fixed(c)) trips.emplace_back(r, c, it.value());
    }
  }
  for (int k = 0; k < divergence.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(divergence, k); it; ++it) {
      const int m = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      if (fixed(c)) continue;
      trips.emplace_back(nv + m, c, Scalar(it.value()));
      trips.emplace_back(c, nv + m, Scalar(it.value()));
    }
  }
  for (int i = 0; i < nv; ++i) {
    if (fixed(i)) trips.emplace_back(i, i, Scalar(1.0));
  }
  Eigen::SparseMatrix<Scalar> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

template Eigen::SparseMatrix<double> saddle_matrix(const Eigen::SparseMatrix<double>&, const Eigen::SparseMatrix<double>&,
                                                   const DofMap&, bool);
template Eigen::SparseMatrix<Complex> saddle_matrix(const Eigen::SparseMatrix<Complex>&,
                                                    const Eigen::SparseMatrix<double>&, const DofMap&, bool);

Eigen::VectorXcd stack_rhs(const DofMap& dofs, const Eigen::VectorXcd& velocity, const Eigen::VectorXcd& pressure) {
  Eigen::VectorXcd rhs(dofs.num_dofs());
  rhs << velocity, pressure;
  for (int i = 0; i < dofs.num_velocity_dofs(); ++i) {
    if (dofs.constrained[static_cast<std::size_t>(i)]) rhs[i] = 0.0;
  }
  return rhs;
}

ComplexSystem assemble_ccbm_state(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const BoundaryTraceFn& f,
                                  const BoundaryTraceFn& g) {
  const StokesBlocks blocks = assemble_blocks(mesh, dofs, alpha);
  const Eigen::SparseMatrix<Complex> a =
      blocks.stiffness.cast<Complex>() + Complex(0.0, 1.0) * blocks.sigma_mass.cast<Complex>();
  const Eigen::VectorXcd load = boundary_load(mesh, dofs, BoundaryTag::sigma, g) +
                                Complex(0.0, 1.0) * boundary_load(mesh, dofs, BoundaryTag::sigma, f);
  return {saddle_matrix(a, blocks.divergence, dofs),
          stack_rhs(dofs, load, Eigen::VectorXcd::Zero(dofs.num_pressure_dofs()))};
}

RealSystem assemble_mixed_neumann(const TriangleMesh& mesh, const DofMap& dofs, double alpha, const BoundaryTraceFn& g,
                                  const BodyForceFn& body) {
  const StokesBlocks blocks = assemble_blocks(mesh, dofs, alpha);
  const Eigen::VectorXd load = boundary_load(mesh, dofs, BoundaryTag::sigma, g).real() + body_load(mesh, dofs, body);
  const Eigen::VectorXcd rhs = stack_rhs(dofs, load.cast<Complex>(), Eigen::VectorXcd::Zero(dofs.num_pressure_dofs()));
  return {saddle_matrix(blocks.stiffness, blocks.divergence, dofs), rhs.real()};
}

Eigen::VectorXcd adjoint_rhs(const StokesBlocks& blocks, const DofMap& dofs, const Eigen::VectorXd& u_i,
                             const Eigen::VectorXd& p_i) {
  if (u_i.size() != dofs.num_velocity_dofs() || p_i.size() != dofs.num_pressure_dofs()) {
    throw ArgumentError("adjoint sources do not match the mesh");
  }
  const Eigen::VectorXd fv = blocks.velocity_mass * u_i;
  const Eigen::VectorXd fp = blocks.pressure_mass * p_i;
  return stack_rhs(dofs, fv.cast<Complex>(), fp.cast<Complex>());
}

ComplexSystem assemble_ccbm_adjoint(const TriangleMesh& mesh, const DofMap& dofs, double alpha,
                                    const Eigen::VectorXd& u_i, const Eigen::VectorXd& p_i) {
  const StokesBlocks blocks = assemble_blocks(mesh, dofs, alpha);
  const Eigen::SparseMatrix<Complex> a =
      blocks.stiffness.cast<Complex>() - Complex(0.0, 1.0) * blocks.sigma_mass.cast<Complex>();
  return {saddle_matrix(a, blocks.divergence, dofs), adjoint_rhs(blocks, dofs, u_i, p_i)};
}

ComplexStokesField split_solution(const DofMap& dofs, const Eigen::VectorXcd& x) {
  return {x.head(dofs.num_velocity_dofs()), x.tail(dofs.num_pressure_dofs())};
}

RealStokesField split_solution(const DofMap& dofs, const Eigen::VectorXd& x) {
  return {x.head(dofs.num_velocity_dofs()), x.tail(dofs.num_pressure_dofs())};
}

ComplexStokesField solve_sparse(const ComplexSystem& system, const DofMap& dofs) {
  if (system.matrix.rows() != dofs.num_dofs()) throw ArgumentError("system does not match the dof map");
  return split_solution(dofs, solve_linear(system));
}

RealStokesField solve_sparse(const RealSystem& system, const DofMap& dofs) {
  if (system.matrix.rows() != dofs.num_dofs()) throw ArgumentError("system does not match the dof map");
  return split_solution(dofs, solve_linear(system));
}

}  // namespace ccbm::fem
