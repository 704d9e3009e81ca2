#include <doctest.h>

#include <cmath>

#include "ccbm/errors.hpp"
#include "ccbm/geometry/hausdorff.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/inverse/ccbm.hpp"
#include "ccbm/inverse/gradient_check.hpp"

using namespace ccbm;
using namespace ccbm::inverse;
using geometry::BoundaryCurve;
using geometry::BoundaryTag;
using geometry::Point;

namespace {

TriangleMesh circle_mesh(double r, int sigma = 100, int gamma = 70) {
  const BoundaryCurve c = BoundaryCurve::circle(0.0, 0.0, r);
  geometry::MeshOptions o;
  o.sigma_nodes = sigma;
  o.gamma_nodes = gamma;
  return geometry::generate_annulus_mesh(std::span(&c, 1), o);
}

// Noiseless data of the r = 0.5 circle, generated on a 4x finer mesh.
const data::CauchyData& circle_data() {
  static const data::CauchyData d = [] {
    const BoundaryCurve c = BoundaryCurve::circle(0.0, 0.0, 0.5);
    return data::generate_measurement(std::span(&c, 1), {}, 1.0, data::measurement_options(100, 70, 4)).data;
  }();
  return d;
}

CcbmData zero_data() {
  const fem::BoundaryTraceFn z = [](const fem::BoundaryPoint&) { return Eigen::Vector2cd::Zero().eval(); };
  return {1.0, z, z};
}

// Plain P1 Laplace stiffness, one row per vertex.
Eigen::SparseMatrix<double> p1_stiffness(const TriangleMesh& m) {
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& tri : m.triangles) {
    Eigen::Matrix<double, 2, 3> g;
    const Point a = m.vertices[static_cast<std::size_t>(tri[0])];
    const Point b = m.vertices[static_cast<std::size_t>(tri[1])];
    const Point c = m.vertices[static_cast<std::size_t>(tri[2])];
    const double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    // grad lambda_i = rot(opposite edge) / (2 area)
    g.col(0) = Point(b.y() - c.y(), c.x() - b.x()) / area2;
    g.col(1) = Point(c.y() - a.y(), a.x() - c.x()) / area2;
    g.col(2) = Point(a.y() - b.y(), b.x() - a.x()) / area2;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) t.emplace_back(tri[i], tri[j], 0.5 * std::abs(area2) * g.col(i).dot(g.col(j)));
    }
  }
  Eigen::SparseMatrix<double> k(m.num_vertices(), m.num_vertices());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

double gradient_energy(const TriangleMesh& m, const DeformationField& V) {
  const Eigen::SparseMatrix<double> k = p1_stiffness(m);
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v(m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) v[i] = V.values[static_cast<std::size_t>(i)][c];
    s += v.dot(k * v);
  }
  return s;
}

// sum over obstacle edges of |V_b - V_a|^2 / |b - a|
double tangential_energy(const TriangleMesh& m, const DeformationField& V) {
  double s = 0.0;
  for (const auto& e : m.boundary_edges) {
    if (e.tag != BoundaryTag::gamma) continue;
    const auto a = static_cast<std::size_t>(e.a), b = static_cast<std::size_t>(e.b);
    s += (V.values[b] - V.values[a]).squaredNorm() / (m.vertices[b] - m.vertices[a]).norm();
  }
  return s;
}

}  // namespace

TEST_CASE("cost: zero and constant fields") {
  const TriangleMesh m = circle_mesh(0.5, 40, 20);
  const fem::DofMap d = fem::build_dofmap(m);
  fem::ComplexStokesField s{Eigen::VectorXcd::Zero(d.num_velocity_dofs()), Eigen::VectorXcd::Zero(d.num_pressure_dofs())};
  const CostBreakdown z = evaluate_cost(m, d, s);
  CHECK(z.J == 0.0);
  CHECK(z.u_i_norm_sq == 0.0);
  CHECK(z.p_i_norm_sq == 0.0);

  // Real parts do not enter J.
  for (int n = 0; n < d.num_nodes; ++n) s.velocity[2 * n] = fem::Complex(3.0, 1.0);
  const CostBreakdown c = evaluate_cost(m, d, s);
  CHECK(c.J == doctest::Approx(0.5 * fem::domain_area(m)).epsilon(1e-13));
  CHECK(c.J == 0.5 * (c.u_i_norm_sq + c.p_i_norm_sq));

  s.pressure.setConstant(fem::Complex(0.0, 2.0));
  const CostBreakdown p = evaluate_cost(m, d, s);
  CHECK(p.p_i_norm_sq == doctest::Approx(4.0 * fem::domain_area(m)).epsilon(1e-13));
  CHECK(p.J == 0.5 * (p.u_i_norm_sq + p.p_i_norm_sq));
}

TEST_CASE("evaluate: zero data gives zero state, adjoint and gradient") {
  const TriangleMesh m = circle_mesh(0.3, 40, 20);
  const Evaluation ev = evaluate(m, zero_data(), true);
  CHECK(ev.cost.J == 0.0);
  REQUIRE(ev.adjoint);
  CHECK(ev.adjoint->velocity.norm() == 0.0);
  for (auto s : {GradientScheme::recovered, GradientScheme::one_sided_symmetric, GradientScheme::one_sided_gradient}) {
    const ShapeGradientDensity G = shape_gradient(m, ev, 1.0, s);
    CHECK(G.max_abs() == 0.0);
    CHECK(G.l2_norm() == 0.0);
    CHECK(!G.samples.empty());
    const DeformationField V = descent_field(m, G, 0.5);
    for (const auto& v : V.values) CHECK(v.norm() == 0.0);
  }
  const Evaluation no_adj = evaluate(m, zero_data(), false);
  CHECK(!no_adj.adjoint);
  CHECK_THROWS_AS(shape_gradient(m, no_adj, 1.0), ArgumentError);
}

TEST_CASE("shape gradient: state and adjoint from different meshes") {
  const TriangleMesh a = circle_mesh(0.3, 40, 20);
  const TriangleMesh b = circle_mesh(0.3, 48, 24);
  const Evaluation ea = evaluate(a, zero_data(), true);
  const Evaluation eb = evaluate(b, zero_data(), true);
  CHECK_THROWS_AS(shape_gradient(a, ea.dofs, 1.0, ea.state, *eb.adjoint), ArgumentError);
}

TEST_CASE("gradient scheme names") {
  for (auto s : {GradientScheme::recovered, GradientScheme::one_sided_symmetric, GradientScheme::one_sided_gradient}) {
    CHECK(gradient_scheme_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(gradient_scheme_from_string("magic"), ConfigurationError);
}

TEST_CASE("descent field: variational identity and sign") {
  const TriangleMesh m = circle_mesh(0.3, 60, 40);
  const Evaluation ev = evaluate(m, make_ccbm_data(circle_data(), 1.0), true);
  const ShapeGradientDensity G = shape_gradient(m, ev, 1.0);
  REQUIRE(G.max_abs() > 0.0);
  const auto sigma = geometry::boundary_vertex_mask(m, BoundaryTag::sigma);
  for (double eta : {0.25, 0.5, 1.0}) {
    CAPTURE(eta);
    const DeformationField V = descent_field(m, G, eta);
    for (std::size_t i = 0; i < V.values.size(); ++i) {
      if (sigma[i]) CHECK(V.values[i].norm() == 0.0);
    }
    const double slope = G.directional_derivative(m, V);
    const double energy = eta * gradient_energy(m, V) + (1.0 - eta) * tangential_energy(m, V);
    CHECK(slope < 0.0);
    CHECK(slope == doctest::Approx(-energy).epsilon(1e-9));
  }
  CHECK_THROWS_AS(descent_field(m, G, 0.0), ArgumentError);
  CHECK_THROWS_AS(descent_field(m, G, 1.5), ArgumentError);
}

TEST_CASE("descent matrix: eta = 1 is the volume stiffness alone") {
  const TriangleMesh m = circle_mesh(0.4, 40, 24);
  const Eigen::SparseMatrix<double> a = descent_matrix(m, 1.0);
  const Eigen::SparseMatrix<double> k = p1_stiffness(m);
  CHECK((a - k).norm() <= 1e-12 * k.norm());
  // For eta < 1 only obstacle vertex rows gain the tangential term.
  const Eigen::SparseMatrix<double> h = descent_matrix(m, 0.5);
  const Eigen::SparseMatrix<double> diff = h - 0.5 * k;
  const auto gamma = geometry::boundary_vertex_mask(m, BoundaryTag::gamma);
  for (int c = 0; c < diff.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it) {
      if (std::abs(it.value()) > 1e-12) {
        CHECK(gamma[static_cast<std::size_t>(it.row())]);
        CHECK(gamma[static_cast<std::size_t>(it.col())]);
      }
    }
  }
}

TEST_CASE("step size and the H1 norm") {
  const TriangleMesh m = circle_mesh(0.4, 40, 24);
  DeformationField V;
  for (const Point& x : m.vertices) V.values.emplace_back((1.0 - x.squaredNorm()) * Point(1.0, 0.0));
  DeformationField Z{std::vector<Point>(m.vertices.size(), Point::Zero())};
  CHECK(step_size(0.0, V, 0.5, m) == 0.0);
  CHECK(step_size(1.0, Z, 0.5, m) == 0.0);
  const double t1 = step_size(0.3, V, 0.5, m);
  CHECK(t1 > 0.0);
  CHECK(step_size(0.3, V, 1.0, m) == doctest::Approx(2.0 * t1).epsilon(1e-14));
  CHECK(step_size(0.3, V, 0.5, m) == doctest::Approx(0.3 * 0.5 / h1_norm_sq(m, V)).epsilon(1e-14));
  CHECK_THROWS_AS(step_size(0.3, V, 0.0, m), ArgumentError);

  // Linear field (x, 0): |V|^2_L2 = int x^2 and |grad V|^2 = area. The
  // edge-midpoint rule is exact for quadratics.
  DeformationField L;
  for (const Point& x : m.vertices) L.values.emplace_back(x.x(), 0.0);
  double x2 = 0.0, area = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const double a = std::abs(geometry::triangle_signed_area(m, t));
    area += a;
    for (int k = 0; k < 3; ++k) {
      const Point mid = 0.5 * (m.vertices[static_cast<std::size_t>(tri[k])] +
                               m.vertices[static_cast<std::size_t>(tri[(k + 1) % 3])]);
      x2 += a / 3.0 * mid.x() * mid.x();
    }
  }
  CHECK(h1_norm_sq(m, L) == doctest::Approx(x2 + area).epsilon(1e-12));
}

TEST_CASE("finite differences: zero field and matching the gradient") {
  const TriangleMesh m = circle_mesh(0.3);
  const CcbmData d = make_ccbm_data(circle_data(), 1.0);
  DeformationField Z{std::vector<Point>(m.vertices.size(), Point::Zero())};
  const auto fd0 = fd_directional_derivative(m, d, Z, 1e-4);
  REQUIRE(fd0);
  CHECK(*fd0 == 0.0);
  CHECK_THROWS_AS(fd_directional_derivative(m, d, Z, 0.0), ArgumentError);

  GradientCheckOptions o;
  o.fields = 2;
  const GradientCheckReport r = gradient_check(m, d, o);
  REQUIRE(r.fields.size() == 2);
  for (const auto& f : r.fields) {
    CAPTURE(f.index);
    CHECK(f.mismatch <= 0.02);
    CHECK(f.sweep_converges);
  }
}

TEST_CASE("random smooth fields vanish on the outer boundary and are reproducible") {
  const TriangleMesh m = circle_mesh(0.3, 40, 20);
  const auto sigma = geometry::boundary_vertex_mask(m, BoundaryTag::sigma);
  const DeformationField a = random_smooth_field(m, 0, 1);
  const DeformationField b = random_smooth_field(m, 0, 1);
  const DeformationField c = random_smooth_field(m, 0, 2);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (sigma[i]) CHECK(a.values[i].norm() <= 1e-15);
  }
}

TEST_CASE("true obstacle: self-consistency, stationarity and least-squares diagnostic") {
  const TriangleMesh truth = circle_mesh(0.5);
  const TriangleMesh wrong = circle_mesh(0.3);
  const CcbmData d = make_ccbm_data(circle_data(), 1.0);
  const Evaluation et = evaluate(truth, d, true);
  const Evaluation ew = evaluate(wrong, d, true);
  CHECK(et.cost.J <= 8.8e-9);
  CHECK(ew.cost.J > 1e3 * et.cost.J);
  CHECK(shape_gradient(truth, et, 1.0).max_abs() <= 10.0 * std::sqrt(8.8e-9));

  // Adjoint compatibility: int_Sigma v . n + int_Omega p_i = 0.
  for (const auto* pair : {&et, &ew}) {
    const TriangleMesh& m = pair == &et ? truth : wrong;
    const auto& v = *pair->adjoint;
    const Eigen::VectorXcd pi = pair->state.pressure.imag().cast<fem::Complex>();
    const double lhs = std::abs(fem::boundary_integral_flux(m, pair->dofs, v.velocity, BoundaryTag::sigma).real() +
                                fem::pressure_integral(m, pi).real());
    const double scale = std::sqrt(fem::velocity_l2_norm_sq(m, pair->dofs, v.velocity) +
                                   fem::velocity_h1_seminorm_sq(m, pair->dofs, v.velocity)) +
                         std::sqrt(fem::pressure_l2_norm_sq(m, pi));
    CHECK(lhs <= 1e-6 * scale);
  }

  const double ls_truth = evaluate_ls_cost_diagnostic(truth, 1.0, circle_data());
  const double ls_wrong = evaluate_ls_cost_diagnostic(wrong, 1.0, circle_data());
  CHECK(ls_truth <= 1e-6);
  CHECK(ls_wrong > 100.0 * ls_truth);
}

TEST_CASE("least-squares diagnostic vanishes on its own trace") {
  // Exactly for zero data; otherwise up to the spline fit of the piecewise
  // quadratic trace, which shrinks under refinement.
  const BoundaryCurve c = BoundaryCurve::circle(0.0, 0.0, 0.5);
  const data::TraceRule zero = data::TraceRule::parse("zero");
  std::vector<double> ls;
  for (int n : {50, 100}) {
    data::MeasurementOptions o;
    o.sigma_nodes = n;
    o.gamma_nodes = n * 7 / 10;
    CHECK(evaluate_ls_cost_diagnostic(circle_mesh(0.5, n, n * 7 / 10), 1.0,
                                      data::generate_measurement(std::span(&c, 1), zero, 1.0, o).data) == 0.0);
    ls.push_back(evaluate_ls_cost_diagnostic(circle_mesh(0.5, n, n * 7 / 10), 1.0,
                                             data::generate_measurement(std::span(&c, 1), {}, 1.0, o).data));
  }
  CAPTURE(ls[0]);
  CAPTURE(ls[1]);
  CHECK(ls[1] <= 1e-7);
  CHECK(ls[1] < ls[0] / 4.0);
}

TEST_CASE("descent config validation") {
  CHECK_NOTHROW(DescentConfig{}.validate());
  auto bad = [](auto mutate) {
    DescentConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.eta = 0.0; }).validate(), ConfigurationError);
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.eta = 1.01; }).validate(), ConfigurationError);
  CHECK_NOTHROW(bad([](DescentConfig& c) { c.eta = 1.0; }).validate());
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.mu = 0.0; }).validate(), ConfigurationError);
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.eps_J = 0.0; }).validate(), ConfigurationError);
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.eps_T = -1.0; }).validate(), ConfigurationError);
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.max_iters = -1; }).validate(), ConfigurationError);
  CHECK_THROWS_AS(bad([](DescentConfig& c) { c.remesh_every = -1; }).validate(), ConfigurationError);
  CHECK_NOTHROW(bad([](DescentConfig& c) { c.remesh_every = 10; }).validate());
}

TEST_CASE("reconstruction: zero iterations keep only the initial evaluation") {
  ReconstructionSetup s;
  s.descent.max_iters = 0;
  const BoundaryCurve init = BoundaryCurve::circle(0.0, 0.0, 0.3);
  const ReconstructionResult r = run_reconstruction(s, circle_data(), std::span(&init, 1));
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].iter == 0);
  CHECK(std::isnan(r.history[0].hausdorff));
  CHECK(r.termination == Termination::max_iters);
  CHECK(r.final_mesh.vertices == r.initial_mesh.vertices);
}

TEST_CASE("reconstruction: a too-small circle grows toward the truth") {
  ReconstructionSetup s;
  s.descent.max_iters = 5;
  s.truth = {BoundaryCurve::circle(0.0, 0.0, 0.5)};
  const BoundaryCurve init = BoundaryCurve::circle(0.0, 0.0, 0.3);
  int calls = 0;
  s.on_iterate = [&](const IterationRecord&, const TriangleMesh& m) {
    ++calls;
    CHECK(geometry::min_triangle_area(m) > 0.0);
  };
  const ReconstructionResult r = run_reconstruction(s, circle_data(), std::span(&init, 1));
  REQUIRE(r.termination != Termination::error);
  REQUIRE(r.history.size() == 6);
  CHECK(calls == 6);
  CHECK(r.history[0].hausdorff == doctest::Approx(0.2).epsilon(0.02));
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    CAPTURE(k);
    CHECK(r.history[k].hausdorff < r.history[k - 1].hausdorff);
    CHECK(r.history[k].J < r.history[k - 1].J);
    CHECK(r.history[k].descent_slope <= 0.0);
    CHECK(r.history[k].step > 0.0);
  }
  // Every obstacle vertex moved outward.
  const auto p0 = geometry::obstacle_polylines(r.initial_mesh);
  const auto p1 = geometry::obstacle_polylines(r.final_mesh);
  REQUIRE(p0[0].size() == p1[0].size());
  for (std::size_t i = 0; i < p0[0].size(); ++i) CHECK(p1[0][i].norm() > p0[0][i].norm());
}

TEST_CASE("reconstruction: errors after the initial mesh keep the history") {
  ReconstructionSetup s;
  s.descent.max_iters = 5;
  s.on_iterate = [](const IterationRecord& r, const TriangleMesh&) {
    if (r.iter == 2) throw SolverError("injected failure");
  };
  const BoundaryCurve init = BoundaryCurve::circle(0.0, 0.0, 0.3);
  const ReconstructionResult r = run_reconstruction(s, circle_data(), std::span(&init, 1));
  CHECK(r.termination == Termination::error);
  CHECK(r.error == "injected failure");
  CHECK(r.history.size() == 3);

  ReconstructionSetup bad;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(run_reconstruction(bad, circle_data(), std::span(&init, 1)), ArgumentError);
  // Data from the inversion resolution itself are refused.
  data::MeasurementOptions same;
  same.sigma_nodes = 100;
  same.gamma_nodes = 70;
  const BoundaryCurve truth = BoundaryCurve::circle(0.0, 0.0, 0.5);
  const data::CauchyData crime = data::generate_measurement(std::span(&truth, 1), {}, 1.0, same).data;
  CHECK_THROWS_AS(run_reconstruction(ReconstructionSetup{}, crime, std::span(&init, 1)), ConfigurationError);
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::eps_J) != to_string(Termination::eps_T));
  CHECK(to_string(Termination::max_iters) != to_string(Termination::error));
}
