#include "ccbm/inverse/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "ccbm/errors.hpp"
#include "ccbm/random.hpp"

namespace ccbm::inverse {

namespace {

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

double fd_or_throw(const TriangleMesh& mesh, const CcbmData& data, const DeformationField& V, double t) {
  const auto fd = fd_directional_derivative(mesh, data, V, t);
  if (!fd) throw SolverError("finite-difference step produced an invalid mesh");
  return *fd;
}

}  // namespace

DeformationField random_smooth_field(const TriangleMesh& mesh, std::uint64_t seed, int index) {
  auto rng = make_rng(seed, RandomStream::test_fields, static_cast<std::uint64_t>(index));
  std::normal_distribution<double> normal;
  double a[2][6];
  for (auto& row : a) {
    for (double& x : row) x = normal(rng);
  }
  const auto sigma = geometry::boundary_vertex_mask(mesh, geometry::BoundaryTag::sigma);
  DeformationField V;
  V.values.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const geometry::Point& p = mesh.vertices[v];
    const double w = 1.0 - p.squaredNorm();
    const double basis[6] = {1.0, p.x(), p.y(), p.x() * p.y(), p.x() * p.x(), p.y() * p.y()};
    for (int c = 0; c < 2; ++c) {
      double s = 0.0;
      for (int j = 0; j < 6; ++j) s += a[c][j] * basis[j];
      V.values[v][c] = sigma[v] ? 0.0 : w * s;
    }
  }
  return V;
}

GradientCheckReport gradient_check(const TriangleMesh& mesh, const CcbmData& data,
                                   const GradientCheckOptions& options) {
  if (options.fields < 1) throw ArgumentError("gradient check needs at least one field");
  if (options.sweep.size() < 3) throw ArgumentError("Richardson sweep needs at least 3 step sizes");
  const Evaluation ev = evaluate(mesh, data, true);
  const ShapeGradientDensity G = shape_gradient(mesh, ev, data.alpha, options.scheme);
  GradientCheckReport report;
  for (int i = 0; i < options.fields; ++i) {
    const DeformationField V = random_smooth_field(mesh, options.seed, i);
    FieldCheck fc;
    fc.index = i;
    fc.analytic = G.directional_derivative(mesh, V);
    fc.fd = fd_or_throw(mesh, data, V, options.t);
    fc.mismatch = relative(fc.analytic, fc.fd);
    for (double t : options.sweep) {
      fc.sweep_fd.push_back(fd_or_throw(mesh, data, V, t));
      fc.sweep_mismatch.push_back(relative(fc.analytic, fc.sweep_fd.back()));
    }
    const std::size_t n = fc.sweep_fd.size();
    const double d1 = fc.sweep_fd[n - 3] - fc.sweep_fd[n - 2];
    const double d2 = fc.sweep_fd[n - 2] - fc.sweep_fd[n - 1];
    const double ratio = options.sweep[n - 2] / options.sweep[n - 1];
    fc.observed_order = std::log(std::abs(d1 / d2)) / std::log(options.sweep[n - 3] / options.sweep[n - 2]);
    fc.fd_limit = fc.sweep_fd[n - 1] - d2 / (ratio * ratio - 1.0);
    fc.floor_mismatch = relative(fc.analytic, fc.fd_limit);
    fc.sweep_converges = true;
    for (std::size_t k = 1; k < n; ++k) {
      if (!(std::abs(fc.sweep_fd[k] - fc.fd_limit) < std::abs(fc.sweep_fd[k - 1] - fc.fd_limit))) {
        fc.sweep_converges = false;
      }
    }
    report.max_mismatch = std::max(report.max_mismatch, fc.mismatch);
    report.fields.push_back(fc);
  }
  return report;
}

}  // namespace ccbm::inverse
