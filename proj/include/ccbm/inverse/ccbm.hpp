#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccbm/data/cauchy_data.hpp"
#include "ccbm/fem/assembly.hpp"
#include "ccbm/fem/postprocess.hpp"
#include "ccbm/geometry/curve.hpp"
#include "ccbm/geometry/mesh.hpp"

namespace ccbm::inverse {

using geometry::DeformationField;
using geometry::TriangleMesh;

struct CostBreakdown {
  double J = 0.0;
  double u_i_norm_sq = 0.0;
  double p_i_norm_sq = 0.0;
};

/// Boundary data of the complex Robin problem: f interpolated from the
/// samples, g from its rule.
struct CcbmData {
  double alpha = 1.0;
  fem::BoundaryTraceFn f;
  fem::BoundaryTraceFn g;
};

CcbmData make_ccbm_data(const data::CauchyData& data, double alpha);

/// State and adjoint on one mesh, sharing one factorization.
struct Evaluation {
  fem::DofMap dofs;
  fem::StokesBlocks blocks;
  fem::ComplexStokesField state;
  std::optional<fem::ComplexStokesField> adjoint;
  CostBreakdown cost;
};

/// Solves the state problem; with_adjoint also solves the adjoint problem
/// sourced by the imaginary parts of the state.
Evaluation evaluate(const TriangleMesh& mesh, const CcbmData& data, bool with_adjoint);

/// J = (|u_i|^2 + |p_i|^2) / 2 by quadrature.
CostBreakdown evaluate_cost(const TriangleMesh& mesh, const fem::DofMap& dofs, const fem::ComplexStokesField& state);

/// Least-squares misfit (1/2) int_Sigma |u_N - f|^2 of the mixed Dirichlet-Neumann
/// solution. Diagnostic only.
double evaluate_ls_cost_diagnostic(const TriangleMesh& mesh, double alpha, const data::CauchyData& data);

struct GradientSample {
  int edge = 0;
  geometry::Point x = geometry::Point::Zero();
  geometry::Point normal = geometry::Point::Zero();
  double weight = 0.0;
  double G = 0.0;
};

struct ShapeGradientDensity {
  /// Gauss points of the obstacle edges.
  std::vector<GradientSample> samples;
  /// Edge-quadrature-weighted averages at mesh vertices (zero off the obstacle).
  std::vector<double> nodal;

  /// Sum of w G n . V with V linear along each edge.
  [[nodiscard]] double directional_derivative(const TriangleMesh& mesh, const DeformationField& V) const;
  /// L2(Gamma) norm of G n.
  [[nodiscard]] double l2_norm() const;
  [[nodiscard]] double max_abs() const;
};

/// How the boundary traces entering G are obtained.
enum class GradientScheme {
  /// Tractions of state and adjoint recovered from their weak-form residuals on
  /// Gamma. With u = 0 and div u = 0 there, (grad u) n = (tau . t_u / alpha) tau,
  /// so G = Im{ conj(tau . t_v) (tau . t_u) } / alpha + p_i^2 / 2.
  recovered,
  /// Gradients of the triangle owning each edge, symmetric stress.
  one_sided_symmetric,
  /// Same, with the pseudo-traction alpha (grad v) n - q n.
  one_sided_gradient,
};
std::string to_string(GradientScheme s);
/// Throws ConfigurationError for unknown names.
GradientScheme gradient_scheme_from_string(const std::string& name);

/// G = Im{ conj(sigma(v, q) n) . (grad u) n } + p_i^2 / 2 from one-sided traces.
ShapeGradientDensity shape_gradient(const TriangleMesh& mesh, const fem::DofMap& dofs, double alpha,
                                    const fem::ComplexStokesField& state, const fem::ComplexStokesField& adjoint,
                                    fem::TractionForm form = fem::TractionForm::symmetric);

/// G for an evaluation holding the adjoint. Throws ArgumentError without one.
ShapeGradientDensity shape_gradient(const TriangleMesh& mesh, const Evaluation& ev, double alpha,
                                    GradientScheme scheme = GradientScheme::recovered);

/// P1 vector field solving
///   eta (grad V, grad phi) + (1 - eta) (d_s V, d_s phi)_Gamma = -(G n, phi)_Gamma,  V = 0 on Sigma.
DeformationField descent_field(const TriangleMesh& mesh, const ShapeGradientDensity& G, double eta);

/// Matrix of the descent problem before the outer boundary rows are eliminated
/// (scalar, one row per vertex; both components share it).
Eigen::SparseMatrix<double> descent_matrix(const TriangleMesh& mesh, double eta);

/// |V|^2_{H1} = |V|^2_{L2} + |grad V|^2_{L2} for the P1 field.
double h1_norm_sq(const TriangleMesh& mesh, const DeformationField& V);

/// mu J / |V|^2_{H1}; 0 when J = 0 or V = 0.
double step_size(double J, const DeformationField& V, double mu, const TriangleMesh& mesh);

/// (J(x + tV) - J(x - tV)) / (2t) with the same boundary data. Returns nullopt
/// when either deformed mesh is invalid.
std::optional<double> fd_directional_derivative(const TriangleMesh& mesh, const CcbmData& data,
                                                const DeformationField& V, double t);

struct DescentConfig {
  double eta = 0.5;
  double mu = 0.5;
  double eps_J = 1e-12;
  double eps_T = 1e-12;
  int max_iters = 300;
  /// 0 disables remeshing.
  int remesh_every = 0;
  int max_halvings = 30;
  GradientScheme scheme = GradientScheme::recovered;

  /// Throws ConfigurationError naming the offending field.
  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double ui_norm = 0.0;
  double pi_norm = 0.0;
  double grad_norm = 0.0;
  /// Step that produced this iterate (0 for the initial one).
  double step = 0.0;
  /// NaN when no truth is known.
  double hausdorff = 0.0;
  int backtracks = 0;
  bool remeshed = false;
  /// <G n, V> along the descent direction that produced this iterate.
  double descent_slope = 0.0;
};

enum class Termination { eps_J, eps_T, max_iters, error };
std::string to_string(Termination t);

struct ReconstructionResult {
  std::vector<IterationRecord> history;
  TriangleMesh initial_mesh;
  TriangleMesh final_mesh;
  Termination termination = Termination::max_iters;
  std::string error;
};

struct ReconstructionSetup {
  DescentConfig descent;
  double alpha = 1.0;
  int sigma_nodes = 100;
  int gamma_nodes = 70;
  /// Optional, for the Hausdorff column.
  std::vector<geometry::BoundaryCurve> truth;
  /// Called after every recorded iterate (including the initial one).
  std::function<void(const IterationRecord&, const TriangleMesh&)> on_iterate;
};

/// Obstacle polylines for Hausdorff comparisons (1024 points per curve).
std::vector<geometry::Polyline> reference_polylines(std::span<const geometry::BoundaryCurve> curves);

/// Shape descent from the initial obstacles. Errors after the initial mesh is
/// built are caught: the result keeps the partial history with
/// termination = error and the message in `error`.
ReconstructionResult run_reconstruction(const ReconstructionSetup& setup, const data::CauchyData& data,
                                        std::span<const geometry::BoundaryCurve> initial);

/// Same, starting from a given mesh.
ReconstructionResult run_reconstruction(const ReconstructionSetup& setup, const data::CauchyData& data,
                                        const TriangleMesh& initial_mesh);

}  // namespace ccbm::inverse
