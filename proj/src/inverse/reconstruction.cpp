#include <cmath>
#include <limits>

#include "ccbm/errors.hpp"
#include "ccbm/geometry/hausdorff.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/inverse/ccbm.hpp"

namespace ccbm::inverse {

namespace {

IterationRecord make_record(int iter, const Evaluation& ev, const ShapeGradientDensity& G, const TriangleMesh& mesh,
                            const std::vector<geometry::Polyline>& reference) {
  IterationRecord r;
  r.iter = iter;
  r.J = ev.cost.J;
  r.ui_norm = std::sqrt(ev.cost.u_i_norm_sq);
  r.pi_norm = std::sqrt(ev.cost.p_i_norm_sq);
  r.grad_norm = G.l2_norm();
  r.hausdorff = std::numeric_limits<double>::quiet_NaN();
  if (!reference.empty()) {
    const auto shape = geometry::obstacle_polylines(mesh);
    r.hausdorff = geometry::hausdorff_distance(shape, reference);
  }
  return r;
}

}  // namespace

void DescentConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigurationError("eta must lie in (0, 1]");
  if (!(mu > 0.0)) throw ConfigurationError("mu must be positive");
  if (!(eps_J > 0.0)) throw ConfigurationError("eps_J must be positive");
  if (!(eps_T > 0.0)) throw ConfigurationError("eps_T must be positive");
  if (max_iters < 0) throw ConfigurationError("max_iters must be >= 0");
  if (remesh_every < 0) throw ConfigurationError("remesh_every must be >= 0");
  if (max_halvings < 0) throw ConfigurationError("max_halvings must be >= 0");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::eps_J:
      return "eps_J";
    case Termination::eps_T:
      return "eps_T";
    case Termination::max_iters:
      return "max_iters";
    case Termination::error:
      return "error";
  }
  return "error";
}

std::vector<geometry::Polyline> reference_polylines(std::span<const geometry::BoundaryCurve> curves) {
  std::vector<geometry::Polyline> out;
  for (const auto& c : curves) out.push_back(geometry::resample_by_arclength(c, 1024));
  return out;
}

ReconstructionResult run_reconstruction(const ReconstructionSetup& setup, const data::CauchyData& data,
                                        std::span<const geometry::BoundaryCurve> initial) {
  geometry::MeshOptions opt;
  opt.sigma_nodes = setup.sigma_nodes;
  opt.gamma_nodes = setup.gamma_nodes;
  return run_reconstruction(setup, data, geometry::generate_annulus_mesh(initial, opt));
}

ReconstructionResult run_reconstruction(const ReconstructionSetup& setup, const data::CauchyData& data,
                                        const TriangleMesh& initial_mesh) {
  const DescentConfig& cfg = setup.descent;
  cfg.validate();
  data::check_no_inverse_crime(data, geometry::count_boundary_vertices(initial_mesh, geometry::BoundaryTag::sigma));
  const CcbmData cd = make_ccbm_data(data, setup.alpha);
  const auto reference = reference_polylines(setup.truth);

  ReconstructionResult result;
  result.initial_mesh = initial_mesh;
  result.final_mesh = initial_mesh;
  TriangleMesh mesh = initial_mesh;
  try {
    double area_floor = geometry::default_area_floor(mesh);
    Evaluation ev = evaluate(mesh, cd, true);
    IterationRecord pending;  // step metadata of the move that produced the current iterate
    bool stop_eps_j = false;
    for (int k = 0;; ++k) {
      const ShapeGradientDensity G = shape_gradient(mesh, ev, setup.alpha, cfg.scheme);
      IterationRecord rec = make_record(k, ev, G, mesh, reference);
      rec.step = pending.step;
      rec.backtracks = pending.backtracks;
      rec.remeshed = pending.remeshed;
      rec.descent_slope = pending.descent_slope;
      result.history.push_back(rec);
      result.final_mesh = mesh;
      if (setup.on_iterate) setup.on_iterate(rec, mesh);
      if (stop_eps_j) {
        result.termination = Termination::eps_J;
        break;
      }
      if (k >= cfg.max_iters) {
        result.termination = Termination::max_iters;
        break;
      }
      const DeformationField V = descent_field(mesh, G, cfg.eta);
      double t = step_size(ev.cost.J, V, cfg.mu, mesh);
      if (!(t >= cfg.eps_T)) {
        result.termination = Termination::eps_T;
        break;
      }
      std::optional<TriangleMesh> moved = geometry::deform_mesh(mesh, V, t, area_floor);
      int halvings = 0;
      while (!moved && halvings < cfg.max_halvings) {
        t *= 0.5;
        ++halvings;
        moved = geometry::deform_mesh(mesh, V, t, area_floor);
      }
      if (!moved || t < cfg.eps_T) {
        result.termination = Termination::eps_T;
        break;
      }
      pending = IterationRecord{};
      pending.step = t;
      pending.backtracks = halvings;
      pending.descent_slope = G.directional_derivative(mesh, V);
      mesh = std::move(*moved);
      if (cfg.remesh_every > 0 && (k + 1) % cfg.remesh_every == 0) {
        mesh = geometry::remesh(mesh);
        area_floor = geometry::default_area_floor(mesh);
        pending.remeshed = true;
      }
      const double previous_J = ev.cost.J;
      ev = evaluate(mesh, cd, true);
      stop_eps_j = !pending.remeshed && std::abs(ev.cost.J - previous_J) < cfg.eps_J;
    }
  } catch (const Error& e) {
    result.termination = Termination::error;
    result.error = e.what();
  }
  return result;
}

}  // namespace ccbm::inverse
