#include "ccbm/fem/postprocess.hpp"

#include <functional>

#include <Eigen/SparseCholesky>

#include "ccbm/errors.hpp"
#include "ccbm/fem/quadrature.hpp"

namespace ccbm::fem {

namespace {

ElementGeometry geometry_of(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  return {mesh.vertices[static_cast<std::size_t>(tri[0])], mesh.vertices[static_cast<std::size_t>(tri[1])],
          mesh.vertices[static_cast<std::size_t>(tri[2])]};
}

Bary edge_bary(const BoundaryEdgeDofs& e, double s) {
  Bary l{0.0, 0.0, 0.0};
  l[static_cast<std::size_t>(e.local_a)] = 1.0 - s;
  l[static_cast<std::size_t>(e.local_b)] = s;
  return l;
}

void require_tag(const DofMap& dofs, BoundaryTag tag) {
  for (const auto& e : dofs.boundary) {
    if (e.tag == tag) return;
  }
  throw ArgumentError("no boundary edge carries the requested tag");
}

}  // namespace

Eigen::Vector2cd velocity_at(const DofMap& dofs, const Eigen::VectorXcd& velocity, int triangle, const Bary& l) {
  const auto n = p2_values(l);
  const auto& nodes = dofs.cell_nodes[static_cast<std::size_t>(triangle)];
  Eigen::Vector2cd u = Eigen::Vector2cd::Zero();
  for (int k = 0; k < 6; ++k) {
    const int node = nodes[static_cast<std::size_t>(k)];
    u[0] += n[static_cast<std::size_t>(k)] * velocity[DofMap::velocity_dof(node, 0)];
    u[1] += n[static_cast<std::size_t>(k)] * velocity[DofMap::velocity_dof(node, 1)];
  }
  return u;
}

Eigen::Matrix2cd velocity_gradient_at(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity,
                                      int triangle, const Bary& l) {
  const ElementGeometry g = geometry_of(mesh, triangle);
  const Eigen::Matrix<double, 6, 2> dn = p2_gradients(l, g);
  const auto& nodes = dofs.cell_nodes[static_cast<std::size_t>(triangle)];
  Eigen::Matrix2cd grad = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 6; ++k) {
    const int node = nodes[static_cast<std::size_t>(k)];
    for (int c = 0; c < 2; ++c) {
      grad.row(c) += velocity[DofMap::velocity_dof(node, c)] * dn.row(k).cast<Complex>();
    }
  }
  return grad;
}

Complex pressure_at(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure, int triangle, const Bary& l) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(triangle)];
  return l[0] * pressure[tri[0]] + l[1] * pressure[tri[1]] + l[2] * pressure[tri[2]];
}

Complex boundary_integral_flux(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity,
                               BoundaryTag tag) {
  require_tag(dofs, tag);
  const EdgeRule& rule = edge_rule_gauss3();
  Complex flux = 0.0;
  for (const auto& e : dofs.boundary) {
    if (e.tag != tag) continue;
    const Point d = mesh.vertices[static_cast<std::size_t>(e.b)] - mesh.vertices[static_cast<std::size_t>(e.a)];
    // Right normal scaled by the edge length.
    const Eigen::Vector2cd n_len(d.y(), -d.x());
    const std::array<int, 3> nodes{e.a, e.mid, e.b};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto n = p2_edge_values(rule.points[q]);
      Eigen::Vector2cd u = Eigen::Vector2cd::Zero();
      for (int i = 0; i < 3; ++i) {
        const int node = nodes[static_cast<std::size_t>(i)];
        u[0] += n[static_cast<std::size_t>(i)] * velocity[DofMap::velocity_dof(node, 0)];
        u[1] += n[static_cast<std::size_t>(i)] * velocity[DofMap::velocity_dof(node, 1)];
      }
      flux += rule.weights[q] * (u[0] * n_len[0] + u[1] * n_len[1]);
    }
  }
  return flux;
}

std::vector<BoundarySample> boundary_stress_and_normal_derivative(const TriangleMesh& mesh, const DofMap& dofs,
                                                                  double alpha, const Eigen::VectorXcd& velocity,
                                                                  const Eigen::VectorXcd& pressure, BoundaryTag tag,
                                                                  TractionForm form) {
  require_tag(dofs, tag);
  dofs.check_mesh(mesh);
  if (velocity.size() != dofs.num_velocity_dofs() || pressure.size() != dofs.num_pressure_dofs()) {
    throw ArgumentError("field does not match the dof map");
  }
  const EdgeRule& rule = edge_rule_gauss3();
  std::vector<BoundarySample> out;
  for (std::size_t ei = 0; ei < dofs.boundary.size(); ++ei) {
    const auto& e = dofs.boundary[ei];
    if (e.tag != tag) continue;
    const Point& xa = mesh.vertices[static_cast<std::size_t>(e.a)];
    const Point d = mesh.vertices[static_cast<std::size_t>(e.b)] - xa;
    const double len = d.norm();
    const Point normal(d.y() / len, -d.x() / len);
    const Eigen::Vector2cd nc = normal.cast<Complex>();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Bary l = edge_bary(e, rule.points[q]);
      const Eigen::Matrix2cd grad = velocity_gradient_at(mesh, dofs, velocity, e.triangle, l);
      const Complex p = pressure_at(mesh, pressure, e.triangle, l);
      BoundarySample s;
      s.edge = static_cast<int>(ei);
      s.x = xa + rule.points[q] * d;
      s.normal = normal;
      s.weight = rule.weights[q] * len;
      s.pressure = p;
      s.normal_derivative = grad * nc;
      const Eigen::Matrix2cd strain = form == TractionForm::symmetric ? Eigen::Matrix2cd(grad + grad.transpose()) : grad;
      s.traction = alpha * strain * nc - p * nc;
      out.push_back(s);
    }
  }
  return out;
}

Eigen::VectorXcd recover_boundary_traction(const TriangleMesh& mesh, const DofMap& dofs,
                                           const Eigen::VectorXcd& residual, BoundaryTag tag) {
  require_tag(dofs, tag);
  dofs.check_mesh(mesh);
  if (residual.size() != dofs.num_velocity_dofs()) throw ArgumentError("residual does not match the dof map");
  std::vector<int> local(static_cast<std::size_t>(dofs.num_nodes), -1);
  std::vector<int> nodes;
  for (const auto& e : dofs.boundary) {
    if (e.tag != tag) continue;
    for (int n : {e.a, e.mid, e.b}) {
      if (local[static_cast<std::size_t>(n)] < 0) {
        local[static_cast<std::size_t>(n)] = static_cast<int>(nodes.size());
        nodes.push_back(n);
      }
    }
  }
  const EdgeRule& rule = edge_rule_gauss3();
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& e : dofs.boundary) {
    if (e.tag != tag) continue;
    const double len = (mesh.vertices[static_cast<std::size_t>(e.b)] - mesh.vertices[static_cast<std::size_t>(e.a)]).norm();
    const int idx[3] = {local[static_cast<std::size_t>(e.a)], local[static_cast<std::size_t>(e.mid)],
                        local[static_cast<std::size_t>(e.b)]};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto N = p2_edge_values(rule.points[q]);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) trips.emplace_back(idx[i], idx[j], rule.weights[q] * len * N[i] * N[j]);
      }
    }
  }
  const int n = static_cast<int>(nodes.size());
  Eigen::SparseMatrix<double> mass(n, n);
  mass.setFromTriplets(trips.begin(), trips.end());
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass);
  if (ldlt.info() != Eigen::Success) throw SolverError("boundary mass matrix is singular");
  Eigen::MatrixXd rhs(n, 4);
  for (int k = 0; k < n; ++k) {
    const auto node = static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(k)]);
    for (int c = 0; c < 2; ++c) {
      rhs(k, 2 * c) = residual[2 * node + c].real();
      rhs(k, 2 * c + 1) = residual[2 * node + c].imag();
    }
  }
  const Eigen::MatrixXd sol = ldlt.solve(rhs);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(residual.size());
  for (int k = 0; k < n; ++k) {
    const auto node = static_cast<Eigen::Index>(nodes[static_cast<std::size_t>(k)]);
    for (int c = 0; c < 2; ++c) out[2 * node + c] = Complex(sol(k, 2 * c), sol(k, 2 * c + 1));
  }
  return out;
}

Eigen::Vector2cd boundary_trace_at(const DofMap& dofs, const Eigen::VectorXcd& values, int edge, double s) {
  const auto& e = dofs.boundary.at(static_cast<std::size_t>(edge));
  const auto N = p2_edge_values(s);
  const int nodes[3] = {e.a, e.mid, e.b};
  Eigen::Vector2cd v = Eigen::Vector2cd::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 2; ++c) v[c] += N[static_cast<std::size_t>(i)] * values[2 * nodes[i] + c];
  }
  return v;
}

double velocity_l2_norm_sq(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity) {
  const TriangleRule& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = geometry_of(mesh, t).area;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      sum += rule.weights[q] * area * velocity_at(dofs, velocity, t, rule.points[q]).squaredNorm();
    }
  }
  return sum;
}

double velocity_h1_seminorm_sq(const TriangleMesh& mesh, const DofMap& dofs, const Eigen::VectorXcd& velocity) {
  const TriangleRule& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = geometry_of(mesh, t).area;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      sum += rule.weights[q] * area * velocity_gradient_at(mesh, dofs, velocity, t, rule.points[q]).squaredNorm();
    }
  }
  return sum;
}

double pressure_l2_norm_sq(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure) {
  const TriangleRule& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = geometry_of(mesh, t).area;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      sum += rule.weights[q] * area * std::norm(pressure_at(mesh, pressure, t, rule.points[q]));
    }
  }
  return sum;
}

Complex pressure_integral(const TriangleMesh& mesh, const Eigen::VectorXcd& pressure) {
  Complex sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    sum += geometry_of(mesh, t).area * (pressure[tri[0]] + pressure[tri[1]] + pressure[tri[2]]) / 3.0;
  }
  return sum;
}

double domain_area(const TriangleMesh& mesh) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) sum += geometry_of(mesh, t).area;
  return sum;
}

Eigen::VectorXd interpolate_velocity(const DofMap& dofs, const std::function<Eigen::Vector2d(const Point&)>& u) {
  Eigen::VectorXd out(dofs.num_velocity_dofs());
  for (int n = 0; n < dofs.num_nodes; ++n) {
    const Eigen::Vector2d v = u(dofs.node_coords[static_cast<std::size_t>(n)]);
    out[DofMap::velocity_dof(n, 0)] = v[0];
    out[DofMap::velocity_dof(n, 1)] = v[1];
  }
  return out;
}

Eigen::VectorXd interpolate_pressure(const TriangleMesh& mesh, const std::function<double(const Point&)>& p) {
  Eigen::VectorXd out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = p(mesh.vertices[static_cast<std::size_t>(v)]);
  return out;
}

}  // namespace ccbm::fem
