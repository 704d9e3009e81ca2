#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "ccbm/errors.hpp"
#include "ccbm/fem/assembly.hpp"
#include "ccbm/fem/mms.hpp"
#include "ccbm/fem/postprocess.hpp"
#include "ccbm/geometry/mesher.hpp"

using namespace ccbm;
using namespace ccbm::fem;
using geometry::BoundaryCurve;

namespace {

TriangleMesh annulus(double r, int sigma, int gamma) {
  const BoundaryCurve c = BoundaryCurve::circle(0.0, 0.0, r);
  geometry::MeshOptions opt;
  opt.sigma_nodes = sigma;
  opt.gamma_nodes = gamma;
  return geometry::generate_annulus_mesh(std::span(&c, 1), opt);
}

BoundaryTraceFn rotational() {
  return [](const BoundaryPoint& b) { return Eigen::Vector2cd(std::sin(b.theta), -std::cos(b.theta)); };
}

BoundaryTraceFn zero_trace() {
  return [](const BoundaryPoint&) { return Eigen::Vector2cd::Zero().eval(); };
}

template <class Scalar>
double relative_residual(const LinearSystem<Scalar>& s, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  return (s.matrix * x - s.rhs).norm() / std::max(s.rhs.norm(), 1e-300);
}

}  // namespace

TEST_CASE("dof map: obstacle dofs constrained, midside nodes shared") {
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  for (int n : d.gamma_nodes) {
    CHECK(d.constrained[static_cast<std::size_t>(DofMap::velocity_dof(n, 0))]);
    CHECK(d.constrained[static_cast<std::size_t>(DofMap::velocity_dof(n, 1))]);
  }
  std::map<int, int> uses;
  for (const auto& cell : d.cell_nodes) {
    for (int k = 3; k < 6; ++k) ++uses[cell[static_cast<std::size_t>(k)]];
  }
  int boundary_mid = 0;
  for (const auto& [node, count] : uses) {
    CHECK((count == 1 || count == 2));
    boundary_mid += count == 1 ? 1 : 0;
  }
  CHECK(boundary_mid == static_cast<int>(m.boundary_edges.size()));
  CHECK(d.num_nodes == m.num_vertices() + static_cast<int>(uses.size()));
}

TEST_CASE("CCBM state: zero data gives the zero solution") {
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  const ComplexSystem s = assemble_ccbm_state(m, d, 1.0, zero_trace(), zero_trace());
  const ComplexStokesField f = solve_sparse(s, d);
  CHECK(f.velocity.norm() == 0.0);
  CHECK(f.pressure.norm() == 0.0);
}

TEST_CASE("CCBM state: symmetric stiffness, residual and alpha check") {
  const TriangleMesh m = annulus(0.5, 24, 12);
  CHECK(m.num_triangles() < 400);
  const DofMap d = build_dofmap(m);
  const StokesBlocks b = assemble_blocks(m, d, 2.0);
  CHECK((Eigen::SparseMatrix<double>(b.stiffness.transpose()) - b.stiffness).norm() <= 1e-14 * b.stiffness.norm());
  const ComplexSystem s = assemble_ccbm_state(m, d, 2.0, rotational(), rotational());
  const Eigen::VectorXcd x = solve_linear(s);
  CHECK(relative_residual(s, x) <= 1e-10);
  CHECK_THROWS_AS(assemble_ccbm_state(m, d, 0.0, rotational(), rotational()), ArgumentError);
  CHECK_THROWS_AS(assemble_ccbm_state(m, d, -1.0, rotational(), rotational()), ArgumentError);
}

TEST_CASE("CCBM state: obstacle velocity vanishes, real and imaginary split systems hold") {
  const TriangleMesh m = annulus(0.4, 48, 24);
  const DofMap d = build_dofmap(m);
  const BoundaryTraceFn f = [](const BoundaryPoint& p) {
    return Eigen::Vector2cd(0.3 * std::cos(2 * p.theta), std::sin(p.theta));
  };
  const ComplexStokesField u = solve_sparse(assemble_ccbm_state(m, d, 1.0, f, rotational()), d);
  for (int n : d.gamma_nodes) {
    CHECK(u.velocity[2 * n] == Complex(0.0));
    CHECK(u.velocity[2 * n + 1] == Complex(0.0));
  }
  const StokesBlocks b = assemble_blocks(m, d, 1.0);
  const Eigen::VectorXd gl = boundary_load(m, d, BoundaryTag::sigma, rotational()).real();
  const Eigen::VectorXd fl = boundary_load(m, d, BoundaryTag::sigma, f).real();
  const auto re = u.real();
  const auto im = u.imag();
  Eigen::VectorXd r_real = b.stiffness * re.velocity + b.divergence.transpose() * re.pressure -
                           b.sigma_mass * im.velocity - gl;
  Eigen::VectorXd r_imag = b.stiffness * im.velocity + b.divergence.transpose() * im.pressure +
                           b.sigma_mass * re.velocity - fl;
  for (Eigen::Index i = 0; i < r_real.size(); ++i) {
    if (d.constrained[static_cast<std::size_t>(i)]) r_real[i] = r_imag[i] = 0.0;
  }
  CHECK(r_real.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r_imag.cwiseAbs().maxCoeff() <= 1e-8);
  // Discrete incompressibility: every P1 test function.
  CHECK((b.divergence * re.velocity).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((b.divergence * im.velocity).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("CCBM state: solution map is linear in the data") {
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  const BoundaryTraceFn f1 = [](const BoundaryPoint& p) { return Eigen::Vector2cd(std::cos(p.theta), 0.2); };
  const BoundaryTraceFn f2 = [](const BoundaryPoint& p) { return Eigen::Vector2cd(0.0, std::sin(3 * p.theta)); };
  const BoundaryTraceFn sum = [&](const BoundaryPoint& p) { return Eigen::Vector2cd(f1(p) + f2(p)); };
  const auto a = solve_sparse(assemble_ccbm_state(m, d, 1.0, f1, rotational()), d);
  const auto b = solve_sparse(assemble_ccbm_state(m, d, 1.0, f2, zero_trace()), d);
  const auto c = solve_sparse(assemble_ccbm_state(m, d, 1.0, sum, rotational()), d);
  CHECK((a.velocity + b.velocity - c.velocity).norm() <= 1e-10 * c.velocity.norm());
  CHECK((a.pressure + b.pressure - c.pressure).norm() <= 1e-10 * c.pressure.norm());
}

TEST_CASE("CCBM state: nonsingular on every admissible test mesh") {
  std::vector<BoundaryCurve> curves = {BoundaryCurve::circle(0.1, -0.2, 0.3), BoundaryCurve::square(0, 0, 0.35),
                                       BoundaryCurve::l_shape(0, 0, 0.4)};
  for (auto k : {geometry::CurveKind::peanut_c1, geometry::CurveKind::bean_c2, geometry::CurveKind::kite_c3,
                 geometry::CurveKind::star_c4}) {
    curves.push_back(BoundaryCurve::catalog(k));
  }
  for (const auto& c : curves) {
    CAPTURE(geometry::to_string(c));
    const TriangleMesh m = geometry::generate_annulus_mesh(std::span(&c, 1), {});
    const DofMap d = build_dofmap(m);
    CHECK_NOTHROW((void)ComplexLU(assemble_ccbm_state(m, d, 1.0, rotational(), rotational()).matrix));
  }
}

TEST_CASE("mixed Neumann: zero data and the rotational flux") {
  const TriangleMesh m = annulus(0.5, 64, 32);
  const DofMap d = build_dofmap(m);
  const RealStokesField z = solve_sparse(assemble_mixed_neumann(m, d, 1.0, zero_trace()), d);
  CHECK(z.velocity.norm() == 0.0);
  CHECK(z.pressure.norm() == 0.0);
  const RealSystem s = assemble_mixed_neumann(m, d, 1.0, rotational());
  const Eigen::VectorXd x = solve_linear(s);
  CHECK(relative_residual(s, x) <= 1e-10);
  const RealStokesField u = split_solution(d, x);
  CHECK(u.velocity.norm() > 0.1);
  const Complex flux = boundary_integral_flux(m, d, u.velocity.cast<Complex>(), BoundaryTag::sigma);
  CHECK(std::abs(flux) <= 1e-8);
}

TEST_CASE("CCBM adjoint: zero sources and flux compatibility") {
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  const Eigen::VectorXd zu = Eigen::VectorXd::Zero(d.num_velocity_dofs());
  const Eigen::VectorXd zp = Eigen::VectorXd::Zero(d.num_pressure_dofs());
  const auto z = solve_sparse(assemble_ccbm_adjoint(m, d, 1.0, zu, zp), d);
  CHECK(z.velocity.norm() == 0.0);
  CHECK(z.pressure.norm() == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Eigen::VectorXd ui(d.num_velocity_dofs()), pi(d.num_pressure_dofs());
  for (auto& v : ui) v = n(rng);
  for (auto& v : pi) v = n(rng);
  for (Eigen::Index i = 0; i < ui.size(); ++i) {
    if (d.constrained[static_cast<std::size_t>(i)]) ui[i] = 0.0;
  }
  const auto v = solve_sparse(assemble_ccbm_adjoint(m, d, 1.0, ui, pi), d);
  const Complex flux = boundary_integral_flux(m, d, v.velocity, BoundaryTag::sigma);
  const Complex mass = pressure_integral(m, pi.cast<Complex>());
  const double scale = std::sqrt(velocity_l2_norm_sq(m, d, v.velocity) + velocity_h1_seminorm_sq(m, d, v.velocity)) +
                       std::sqrt(pressure_l2_norm_sq(m, pi.cast<Complex>()));
  CHECK(std::abs(flux + mass) <= 1e-6 * scale);
  CHECK_THROWS_AS(assemble_ccbm_adjoint(m, d, 1.0, ui.head(10), pi), ArgumentError);
}

TEST_CASE("sparse solver: identity, singular systems") {
  Eigen::SparseMatrix<double> I(5, 5);
  I.setIdentity();
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  CHECK((solve_linear(RealSystem{I, b}) - b).norm() == 0.0);

  // Pure traction Stokes on the annulus without the obstacle condition or the
  // Robin term: constant velocities are in the kernel.
  const TriangleMesh m = annulus(0.5, 24, 12);
  const DofMap d = build_dofmap(m);
  const StokesBlocks blocks = assemble_blocks(m, d, 1.0);
  const Eigen::SparseMatrix<double> A = saddle_matrix<double>(blocks.stiffness, blocks.divergence, d, false);
  CHECK_THROWS_AS((void)RealLU(A), SolverError);
}

TEST_CASE("boundary flux: divergence theorem") {
  const TriangleMesh m = annulus(0.5, 40, 20);
  const DofMap d = build_dofmap(m);
  const Eigen::VectorXd one = interpolate_velocity(d, [](const Point&) { return Eigen::Vector2d(1.0, 0.0); });
  const Eigen::VectorXd id = interpolate_velocity(d, [](const Point& p) { return Eigen::Vector2d(p); });
  CHECK(std::abs(boundary_integral_flux(m, d, one.cast<Complex>(), BoundaryTag::sigma)) <= 1e-14);
  CHECK(std::abs(boundary_integral_flux(m, d, one.cast<Complex>(), BoundaryTag::gamma)) <= 1e-14);
  // Outer polygon: area N/2 sin(2pi/N).
  const double area = 20.0 * std::sin(2 * std::numbers::pi / 40);
  CHECK(boundary_integral_flux(m, d, id.cast<Complex>(), BoundaryTag::sigma).real() ==
        doctest::Approx(2.0 * area).epsilon(1e-13));
  // Over the whole boundary the flux is twice the domain area.
  const Complex total = boundary_integral_flux(m, d, id.cast<Complex>(), BoundaryTag::sigma) +
                        boundary_integral_flux(m, d, id.cast<Complex>(), BoundaryTag::gamma);
  CHECK(total.real() == doctest::Approx(2.0 * domain_area(m)).epsilon(1e-13));

  DofMap no_gamma = d;
  std::erase_if(no_gamma.boundary, [](const BoundaryEdgeDofs& e) { return e.tag == BoundaryTag::gamma; });
  CHECK_THROWS_AS(boundary_integral_flux(m, no_gamma, one.cast<Complex>(), BoundaryTag::gamma), ArgumentError);
  CHECK_THROWS_AS(
      boundary_stress_and_normal_derivative(m, no_gamma, 1.0, one.cast<Complex>(),
                                            Eigen::VectorXcd::Zero(d.num_pressure_dofs()), BoundaryTag::gamma),
      ArgumentError);
}

TEST_CASE("boundary traction: constant pressure and linear velocity") {
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(d.num_velocity_dofs());
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(d.num_pressure_dofs());
  for (auto tag : {BoundaryTag::sigma, BoundaryTag::gamma}) {
    for (const auto& s : boundary_stress_and_normal_derivative(m, d, 1.0, zero, ones, tag)) {
      CHECK((s.traction + s.normal.cast<Complex>()).norm() <= 1e-14);
    }
  }
  const Eigen::VectorXcd shear =
      interpolate_velocity(d, [](const Point& p) { return Eigen::Vector2d(p.y(), 0.0); }).cast<Complex>();
  const Eigen::VectorXcd p0 = Eigen::VectorXcd::Zero(d.num_pressure_dofs());
  for (const auto& s : boundary_stress_and_normal_derivative(m, d, 1.0, shear, p0, BoundaryTag::sigma)) {
    const Eigen::Vector2d n = s.normal;
    CHECK((s.traction - Eigen::Vector2cd(n.y(), n.x())).norm() <= 1e-13);
    CHECK((s.normal_derivative - Eigen::Vector2cd(n.y(), 0.0)).norm() <= 1e-13);
  }
}

TEST_CASE("boundary traction of the manufactured solution converges at second order") {
  const ExactStokes exact = annulus_manufactured_solution();
  const BoundaryCurve hole = BoundaryCurve::circle(0.0, 0.0, 0.5);
  geometry::MeshOptions opt;
  opt.sigma_nodes = 32;
  opt.gamma_nodes = 16;
  TriangleMesh m = geometry::generate_annulus_mesh(std::span(&hole, 1), opt);
  const geometry::BoundarySnap snap = [](const Point& p, BoundaryTag tag, int) -> Point {
    return p.normalized() * (tag == BoundaryTag::sigma ? 1.0 : 0.5);
  };
  std::vector<double> err, h;
  for (int level = 0; level < 3; ++level) {
    if (level > 0) m = geometry::refine_uniform(m, snap);
    const DofMap d = build_dofmap(m);
    const RealStokesField f = solve_manufactured(m, d, 1.0, exact);
    double e = 0.0;
    for (const auto& s : boundary_stress_and_normal_derivative(m, d, 1.0, f.velocity.cast<Complex>(),
                                                               f.pressure.cast<Complex>(), BoundaryTag::gamma)) {
      const Eigen::Matrix2d g = exact.grad_u(s.x);
      const Eigen::Vector2d t = (g + g.transpose()) * s.normal - exact.p(s.x) * s.normal;
      e = std::max(e, (s.traction.real() - t).norm());
    }
    err.push_back(e);
    h.push_back(std::pow(0.5, level));
  }
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double rate = std::log(err[k] / err[k + 1]) / std::log(h[k] / h[k + 1]);
    CAPTURE(rate);
    CHECK(rate >= 1.7);
  }
}

TEST_CASE("recovered boundary traction reproduces the natural boundary data") {
  // For the mixed problem the residual on the outer boundary is the load of
  // g, so the recovered traction is the boundary P2 projection of g.
  std::vector<double> err;
  for (int n : {32, 64}) {
    const TriangleMesh m = annulus(0.5, n, n / 2);
    const DofMap d = build_dofmap(m);
    const RealStokesField u = solve_sparse(assemble_mixed_neumann(m, d, 1.0, rotational()), d);
    const StokesBlocks b = assemble_blocks(m, d, 1.0);
    const Eigen::VectorXd r = b.stiffness * u.velocity + b.divergence.transpose() * u.pressure;
    const Eigen::VectorXcd t = recover_boundary_traction(m, d, r.cast<Complex>(), BoundaryTag::sigma);
    double e_max = 0.0;
    for (std::size_t e = 0; e < d.boundary.size(); ++e) {
      const Eigen::Vector2cd v = boundary_trace_at(d, t, static_cast<int>(e), 0.5);
      if (d.boundary[e].tag != BoundaryTag::sigma) {
        CHECK(v.norm() == 0.0);
        continue;
      }
      const Point x = d.node_coords[static_cast<std::size_t>(d.boundary[e].mid)];
      const double th = std::atan2(x.y(), x.x());
      e_max = std::max(e_max, (v.real() - Eigen::Vector2d(std::sin(th), -std::cos(th))).norm());
    }
    err.push_back(e_max);
  }
  CHECK(err[0] <= 1e-4);
  CHECK(err[1] <= err[0] / 6.0);
}

TEST_CASE("manufactured solution: interpolation error and convergence orders") {
  const ExactStokes exact = annulus_manufactured_solution();
  const TriangleMesh m = annulus(0.5, 32, 16);
  const DofMap d = build_dofmap(m);
  const RealStokesField interp{interpolate_velocity(d, exact.u), interpolate_pressure(m, exact.p)};
  const MmsErrors ie = mms_errors(m, d, interp, exact);
  const MmsErrors fe = mms_errors(m, d, solve_manufactured(m, d, 1.0, exact), exact);
  CHECK(ie.velocity_l2 > 0.0);
  // Quasi-optimality: the discrete solution is within a modest factor of the interpolant.
  CHECK(fe.velocity_h1 <= 10.0 * ie.velocity_h1);

  const MmsStudy study = run_mms_study(2);
  REQUIRE(study.rates.size() == 2);
  for (const auto& r : study.rates) {
    CHECK(r.velocity_h1 >= 1.8);
    CHECK(r.velocity_l2 >= 2.7);
    CHECK(r.pressure_l2 >= 1.8);
  }
}
