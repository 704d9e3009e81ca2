#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "ccbm/errors.hpp"
#include "ccbm/fem/quadrature.hpp"
#include "ccbm/inverse/ccbm.hpp"

namespace ccbm::inverse {

namespace {

using geometry::BoundaryTag;
using geometry::Point;

// Position of x along the edge a -> b.
double edge_parameter(const TriangleMesh& mesh, int a, int b, const Point& x) {
  const Point& xa = mesh.vertices[static_cast<std::size_t>(a)];
  const Point d = mesh.vertices[static_cast<std::size_t>(b)] - xa;
  return (x - xa).dot(d) / d.squaredNorm();
}

struct P1Matrices {
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> stiffness;
};

P1Matrices p1_matrices(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<double>> m, k;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const fem::ElementGeometry g(mesh.vertices[static_cast<std::size_t>(tri[0])],
                                 mesh.vertices[static_cast<std::size_t>(tri[1])],
                                 mesh.vertices[static_cast<std::size_t>(tri[2])]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int r = tri[static_cast<std::size_t>(i)], c = tri[static_cast<std::size_t>(j)];
        m.emplace_back(r, c, g.area * (i == j ? 2.0 : 1.0) / 12.0);
        k.emplace_back(r, c, g.area * g.grad_lambda.row(i).dot(g.grad_lambda.row(j)));
      }
    }
  }
  const int n = mesh.num_vertices();
  P1Matrices out;
  out.mass.resize(n, n);
  out.stiffness.resize(n, n);
  out.mass.setFromTriplets(m.begin(), m.end());
  out.stiffness.setFromTriplets(k.begin(), k.end());
  return out;
}

void lump_to_vertices(const TriangleMesh& mesh, ShapeGradientDensity& out) {
  out.nodal.assign(mesh.vertices.size(), 0.0);
  std::vector<double> weight(mesh.vertices.size(), 0.0);
  for (const auto& s : out.samples) {
    const auto& e = mesh.boundary_edges[static_cast<std::size_t>(s.edge)];
    const double t = edge_parameter(mesh, e.a, e.b, s.x);
    out.nodal[static_cast<std::size_t>(e.a)] += s.weight * (1.0 - t) * s.G;
    out.nodal[static_cast<std::size_t>(e.b)] += s.weight * t * s.G;
    weight[static_cast<std::size_t>(e.a)] += s.weight * (1.0 - t);
    weight[static_cast<std::size_t>(e.b)] += s.weight * t;
  }
  for (std::size_t v = 0; v < weight.size(); ++v) {
    if (weight[v] > 0.0) out.nodal[v] /= weight[v];
  }
}

ShapeGradientDensity recovered_gradient(const TriangleMesh& mesh, const Evaluation& ev, double alpha) {
  const auto& blocks = ev.blocks;
  const auto& u = ev.state;
  const auto& v = *ev.adjoint;
  const Eigen::SparseMatrix<fem::Complex> k = blocks.stiffness.cast<fem::Complex>();
  const Eigen::SparseMatrix<fem::Complex> bt = blocks.divergence.transpose().cast<fem::Complex>();
  const Eigen::VectorXcd ru = k * u.velocity + bt * u.pressure;
  const Eigen::VectorXd ui = u.velocity.imag();
  const Eigen::VectorXcd rv = k * v.velocity + bt * v.pressure - (blocks.velocity_mass * ui).cast<fem::Complex>();
  const Eigen::VectorXcd tu = fem::recover_boundary_traction(mesh, ev.dofs, ru, BoundaryTag::gamma);
  const Eigen::VectorXcd tv = fem::recover_boundary_traction(mesh, ev.dofs, rv, BoundaryTag::gamma);

  const fem::EdgeRule& rule = fem::edge_rule_gauss3();
  ShapeGradientDensity out;
  for (std::size_t ei = 0; ei < ev.dofs.boundary.size(); ++ei) {
    const auto& e = ev.dofs.boundary[ei];
    if (e.tag != BoundaryTag::gamma) continue;
    const Point& xa = mesh.vertices[static_cast<std::size_t>(e.a)];
    const Point d = mesh.vertices[static_cast<std::size_t>(e.b)] - xa;
    const double len = d.norm();
    const Point tau = d / len;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Eigen::Vector2cd a = fem::boundary_trace_at(ev.dofs, tu, static_cast<int>(ei), s);
      const Eigen::Vector2cd b = fem::boundary_trace_at(ev.dofs, tv, static_cast<int>(ei), s);
      const fem::Complex su = a[0] * tau.x() + a[1] * tau.y();
      const fem::Complex sv = b[0] * tau.x() + b[1] * tau.y();
      fem::Bary l{0.0, 0.0, 0.0};
      l[static_cast<std::size_t>(e.local_a)] = 1.0 - s;
      l[static_cast<std::size_t>(e.local_b)] = s;
      const double p_i = fem::pressure_at(mesh, u.pressure, e.triangle, l).imag();
      GradientSample g;
      g.edge = static_cast<int>(ei);
      g.x = xa + s * d;
      g.normal = Point(tau.y(), -tau.x());
      g.weight = rule.weights[q] * len;
      g.G = (std::conj(sv) * su).imag() / alpha + 0.5 * p_i * p_i;
      out.samples.push_back(g);
    }
  }
  lump_to_vertices(mesh, out);
  return out;
}

}  // namespace

std::string to_string(GradientScheme s) {
  switch (s) {
    case GradientScheme::recovered: return "recovered";
    case GradientScheme::one_sided_symmetric: return "one_sided_symmetric";
    case GradientScheme::one_sided_gradient: return "one_sided_gradient";
  }
  return "recovered";
}

GradientScheme gradient_scheme_from_string(const std::string& name) {
  for (auto s : {GradientScheme::recovered, GradientScheme::one_sided_symmetric, GradientScheme::one_sided_gradient}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigurationError("unknown gradient scheme '" + name + "'");
}

ShapeGradientDensity shape_gradient(const TriangleMesh& mesh, const fem::DofMap& dofs, double alpha,
                                    const fem::ComplexStokesField& state, const fem::ComplexStokesField& adjoint,
                                    fem::TractionForm form) {
  dofs.check_mesh(mesh);
  if (adjoint.velocity.size() != state.velocity.size() || adjoint.pressure.size() != state.pressure.size()) {
    throw ArgumentError("state and adjoint live on different meshes");
  }
  const auto sv = fem::boundary_stress_and_normal_derivative(mesh, dofs, alpha, adjoint.velocity, adjoint.pressure,
                                                             BoundaryTag::gamma, form);
  const auto su = fem::boundary_stress_and_normal_derivative(mesh, dofs, alpha, state.velocity, state.pressure,
                                                             BoundaryTag::gamma, form);
  ShapeGradientDensity out;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    const fem::Complex prod = sv[i].traction.conjugate().cwiseProduct(su[i].normal_derivative).sum();
    const double p_i = su[i].pressure.imag();
    GradientSample s;
    s.edge = sv[i].edge;
    s.x = sv[i].x;
    s.normal = sv[i].normal;
    s.weight = sv[i].weight;
    s.G = prod.imag() + 0.5 * p_i * p_i;
    out.samples.push_back(s);
  }
  lump_to_vertices(mesh, out);
  return out;
}

ShapeGradientDensity shape_gradient(const TriangleMesh& mesh, const Evaluation& ev, double alpha,
                                    GradientScheme scheme) {
  if (!ev.adjoint) throw ArgumentError("evaluation has no adjoint");
  ev.dofs.check_mesh(mesh);
  switch (scheme) {
    case GradientScheme::one_sided_symmetric:
      return shape_gradient(mesh, ev.dofs, alpha, ev.state, *ev.adjoint, fem::TractionForm::symmetric);
    case GradientScheme::one_sided_gradient:
      return shape_gradient(mesh, ev.dofs, alpha, ev.state, *ev.adjoint, fem::TractionForm::gradient);
    case GradientScheme::recovered:
      break;
  }
  return recovered_gradient(mesh, ev, alpha);
}

double ShapeGradientDensity::directional_derivative(const TriangleMesh& mesh, const DeformationField& V) const {
  if (V.values.size() != mesh.vertices.size()) throw ArgumentError("deformation field size does not match mesh");
  double sum = 0.0;
  // Gradient samples carry the boundary edge index of the mesh's boundary list.
  for (const auto& s : samples) {
    const auto& e = mesh.boundary_edges[static_cast<std::size_t>(s.edge)];
    const double t = edge_parameter(mesh, e.a, e.b, s.x);
    const Point v = (1.0 - t) * V.values[static_cast<std::size_t>(e.a)] + t * V.values[static_cast<std::size_t>(e.b)];
    sum += s.weight * s.G * s.normal.dot(v);
  }
  return sum;
}

double ShapeGradientDensity::l2_norm() const {
  double sum = 0.0;
  for (const auto& s : samples) sum += s.weight * s.G * s.G;
  return std::sqrt(sum);
}

double ShapeGradientDensity::max_abs() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::abs(s.G));
  return m;
}

Eigen::SparseMatrix<double> descent_matrix(const TriangleMesh& mesh, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("eta must lie in (0, 1]");
  Eigen::SparseMatrix<double> a = eta * p1_matrices(mesh).stiffness;
  if (eta < 1.0) {
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& e : mesh.boundary_edges) {
      if (e.tag != BoundaryTag::gamma) continue;
      const double len = (mesh.vertices[static_cast<std::size_t>(e.b)] - mesh.vertices[static_cast<std::size_t>(e.a)]).norm();
      const double k = (1.0 - eta) / len;
      trips.emplace_back(e.a, e.a, k);
      trips.emplace_back(e.b, e.b, k);
      trips.emplace_back(e.a, e.b, -k);
      trips.emplace_back(e.b, e.a, -k);
    }
    Eigen::SparseMatrix<double> kt(a.rows(), a.cols());
    kt.setFromTriplets(trips.begin(), trips.end());
    a += kt;
  }
  return a;
}

DeformationField descent_field(const TriangleMesh& mesh, const ShapeGradientDensity& G, double eta) {
  const int n = mesh.num_vertices();
  const Eigen::SparseMatrix<double> a = descent_matrix(mesh, eta);
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n, 2);
  for (const auto& s : G.samples) {
    const auto& e = mesh.boundary_edges[static_cast<std::size_t>(s.edge)];
    const double t = edge_parameter(mesh, e.a, e.b, s.x);
    rhs.row(e.a) -= s.weight * s.G * (1.0 - t) * s.normal.transpose();
    rhs.row(e.b) -= s.weight * s.G * t * s.normal.transpose();
  }
  const auto sigma = geometry::boundary_vertex_mask(mesh, BoundaryTag::sigma);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      if (!sigma[static_cast<std::size_t>(it.row())] && !sigma[static_cast<std::size_t>(it.col())]) {
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (sigma[static_cast<std::size_t>(v)]) {
      trips.emplace_back(v, v, 1.0);
      rhs.row(v).setZero();
    }
  }
  Eigen::SparseMatrix<double> ac(n, n);
  ac.setFromTriplets(trips.begin(), trips.end());
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(ac);
  if (ldlt.info() != Eigen::Success) throw SolverError("descent system is singular");
  const Eigen::MatrixX2d sol = ldlt.solve(rhs);
  DeformationField V;
  V.values.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    V.values[static_cast<std::size_t>(v)] = sigma[static_cast<std::size_t>(v)] ? Point::Zero() : Point(sol.row(v).transpose());
  }
  return V;
}

double h1_norm_sq(const TriangleMesh& mesh, const DeformationField& V) {
  if (V.values.size() != mesh.vertices.size()) throw ArgumentError("deformation field size does not match mesh");
  const P1Matrices m = p1_matrices(mesh);
  const Eigen::SparseMatrix<double> h1 = m.mass + m.stiffness;
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd x(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) x[v] = V.values[static_cast<std::size_t>(v)][c];
    sum += x.dot(h1 * x);
  }
  return sum;
}

double step_size(double J, const DeformationField& V, double mu, const TriangleMesh& mesh) {
  if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
  if (J <= 0.0) return 0.0;
  const double n2 = h1_norm_sq(mesh, V);
  if (n2 <= 0.0) return 0.0;
  return mu * J / n2;
}

std::optional<double> fd_directional_derivative(const TriangleMesh& mesh, const CcbmData& data,
                                                const DeformationField& V, double t) {
  if (!(t > 0.0)) throw ArgumentError("finite-difference step must be positive");
  const double floor = geometry::default_area_floor(mesh);
  DeformationField minus = V;
  for (auto& v : minus.values) v = -v;
  const auto mp = geometry::deform_mesh(mesh, V, t, floor);
  const auto mm = geometry::deform_mesh(mesh, minus, t, floor);
  if (!mp || !mm) return std::nullopt;
  return (evaluate(*mp, data, false).cost.J - evaluate(*mm, data, false).cost.J) / (2.0 * t);
}

}  // namespace ccbm::inverse
