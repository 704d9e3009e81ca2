#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ccbm/app/config.hpp"
#include "ccbm/app/experiment.hpp"
#include "ccbm/data/cauchy_data.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/fem/mms.hpp"
#include "ccbm/geometry/hausdorff.hpp"
#include "ccbm/geometry/mesh_io.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/inverse/ccbm.hpp"
#include "ccbm/inverse/gradient_check.hpp"

namespace py = pybind11;
using namespace ccbm;
using geometry::BoundaryCurve;
using geometry::Point;
using geometry::Polyline;
using geometry::TriangleMesh;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

Points to_array(std::span<const Point> pts) {
  Points out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return out;
}

Polyline from_array(const Points& a) {
  Polyline out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.emplace_back(a(i, 0), a(i, 1));
  return out;
}

std::vector<Points> to_arrays(const std::vector<Polyline>& loops) {
  std::vector<Points> out;
  for (const auto& l : loops) out.push_back(to_array(l));
  return out;
}

std::vector<Polyline> from_arrays(const std::vector<Points>& loops) {
  std::vector<Polyline> out;
  for (const auto& l : loops) out.push_back(from_array(l));
  return out;
}

// Accepts a curve object, its text form, or a list of either.
std::vector<BoundaryCurve> as_curves(const py::object& o) {
  if (py::isinstance<BoundaryCurve>(o)) return {o.cast<BoundaryCurve>()};
  if (py::isinstance<py::str>(o)) return {geometry::parse_curve(o.cast<std::string>())};
  std::vector<BoundaryCurve> out;
  for (const auto& item : o) {
    if (py::isinstance<py::str>(item)) {
      out.push_back(geometry::parse_curve(item.cast<std::string>()));
    } else {
      out.push_back(item.cast<BoundaryCurve>());
    }
  }
  return out;
}

TriangleMesh make_mesh(const py::object& curves, int sigma_nodes, int gamma_nodes) {
  geometry::MeshOptions o;
  o.sigma_nodes = sigma_nodes;
  o.gamma_nodes = gamma_nodes;
  return geometry::generate_annulus_mesh(as_curves(curves), o);
}

py::dict history_dict(const std::vector<inverse::IterationRecord>& h) {
  std::vector<int> iter, backtracks;
  std::vector<double> J, ui, pi, grad, step, hd;
  for (const auto& r : h) {
    iter.push_back(r.iter);
    J.push_back(r.J);
    ui.push_back(r.ui_norm);
    pi.push_back(r.pi_norm);
    grad.push_back(r.grad_norm);
    step.push_back(r.step);
    hd.push_back(r.hausdorff);
    backtracks.push_back(r.backtracks);
  }
  py::dict d;
  d["iter"] = py::array(py::cast(iter));
  d["J"] = py::array(py::cast(J));
  d["ui_norm"] = py::array(py::cast(ui));
  d["pi_norm"] = py::array(py::cast(pi));
  d["grad_norm"] = py::array(py::cast(grad));
  d["step"] = py::array(py::cast(step));
  d["hausdorff"] = py::array(py::cast(hd));
  d["backtracks"] = py::array(py::cast(backtracks));
  return d;
}

py::dict summary_dict(const app::RunSummary& s) {
  py::dict d;
  d["name"] = s.name;
  d["ok"] = s.ok;
  d["termination"] = inverse::to_string(s.termination);
  d["iterations"] = s.iterations;
  d["final_J"] = s.final_J;
  d["final_hausdorff"] = s.final_hausdorff;
  d["noise"] = s.noise;
  d["wall_time"] = s.wall_time;
  d["error"] = s.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ccbm, m) {
  m.doc() = "Obstacle reconstruction for Stokes flow from boundary measurements";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<MeshError>(m, "MeshError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  // geometry
  py::class_<BoundaryCurve>(m, "BoundaryCurve")
      .def(py::init([](const std::string& text) { return geometry::parse_curve(text); }), py::arg("text"))
      .def_static("circle", &BoundaryCurve::circle, py::arg("cx"), py::arg("cy"), py::arg("r"))
      .def_static("ellipse", &BoundaryCurve::ellipse, py::arg("cx"), py::arg("cy"), py::arg("a"), py::arg("b"))
      .def_static("square", &BoundaryCurve::square, py::arg("cx"), py::arg("cy"), py::arg("half_side"))
      .def_static("l_shape", &BoundaryCurve::l_shape, py::arg("cx"), py::arg("cy"), py::arg("half_side"))
      .def_static(
          "catalog",
          [](const std::string& name, double cx, double cy, double scale) {
            return BoundaryCurve::catalog(geometry::curve_kind_from_string(name), cx, cy, scale);
          },
          py::arg("name"), py::arg("cx") = 0.0, py::arg("cy") = 0.0, py::arg("scale") = 1.0)
      .def_static(
          "polyline", [](const Points& p) { return BoundaryCurve::from_polyline(from_array(p)); }, py::arg("points"))
      .def_property_readonly("kind", [](const BoundaryCurve& c) { return geometry::to_string(c.kind); })
      .def_readonly("parameters", &BoundaryCurve::parameters)
      .def(
          "sample", [](const BoundaryCurve& c, int n) { return to_array(geometry::sample_curve(c, n)); },
          py::arg("n"), "n counterclockwise points at equally spaced parameters")
      .def(
          "resample", [](const BoundaryCurve& c, int n) { return to_array(geometry::resample_by_arclength(c, n)); },
          py::arg("n"), "About n counterclockwise points equidistributed in arclength")
      .def("__str__", [](const BoundaryCurve& c) { return geometry::to_string(c); })
      .def("__repr__", [](const BoundaryCurve& c) { return "BoundaryCurve('" + geometry::to_string(c) + "')"; });

  py::class_<TriangleMesh>(m, "Mesh")
      .def_property_readonly("vertices", [](const TriangleMesh& t) { return to_array(t.vertices); })
      .def_property_readonly("triangles",
                             [](const TriangleMesh& t) {
                               Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> a(t.num_triangles(), 3);
                               for (int i = 0; i < t.num_triangles(); ++i) {
                                 for (int k = 0; k < 3; ++k) a(i, k) = t.triangles[static_cast<std::size_t>(i)][k];
                               }
                               return a;
                             })
      .def_property_readonly("num_vertices", &TriangleMesh::num_vertices)
      .def_property_readonly("num_triangles", &TriangleMesh::num_triangles)
      .def_readonly("h", &TriangleMesh::h_target)
      .def("obstacles", [](const TriangleMesh& t) { return to_arrays(geometry::obstacle_polylines(t)); },
           "Obstacle boundaries as counterclockwise (n, 2) arrays")
      .def("min_angle", [](const TriangleMesh& t) { return geometry::min_angle_degrees(t); })
      .def("save", [](const TriangleMesh& t, const std::filesystem::path& p) { geometry::write_mesh(p, t); })
      .def_static("load", [](const std::filesystem::path& p) { return geometry::read_mesh(p); });

  m.def("generate_mesh", &make_mesh, py::arg("obstacles"), py::arg("sigma_nodes") = 100, py::arg("gamma_nodes") = 70,
        "Annulus mesh of the unit disk minus the obstacles");
  m.def(
      "deform_mesh",
      [](const TriangleMesh& mesh, const Points& field, double t) -> std::optional<TriangleMesh> {
        geometry::DeformationField V{from_array(field)};
        return geometry::deform_mesh(mesh, V, t, geometry::default_area_floor(mesh));
      },
      py::arg("mesh"), py::arg("field"), py::arg("t"), "x + t V(x), or None when the step inverts a triangle");
  m.def("remesh", &geometry::remesh, py::arg("mesh"));
  m.def(
      "hausdorff",
      [](const py::object& a, const py::object& b) {
        auto loops = [](const py::object& o) {
          if (py::isinstance<py::array>(o)) return std::vector<Polyline>{from_array(o.cast<Points>())};
          return from_arrays(o.cast<std::vector<Points>>());
        };
        return geometry::hausdorff_distance(loops(a), loops(b));
      },
      py::arg("a"), py::arg("b"), "Hausdorff distance between closed polylines (an array or a list of arrays)");

  // data
  py::class_<data::CauchyData>(m, "CauchyData")
      .def_property_readonly("theta", [](const data::CauchyData& d) { return py::array(py::cast(d.theta)); })
      .def_property_readonly("f", [](const data::CauchyData& d) { return to_array(d.f); })
      .def_readonly("noise_level", &data::CauchyData::noise_level)
      .def_readonly("seed", &data::CauchyData::rng_seed)
      .def_property_readonly("g", [](const data::CauchyData& d) { return d.g_rule.to_string(); })
      .def("__len__", &data::CauchyData::size)
      .def("l2_norm", &data::trace_l2_norm)
      .def("flux", &data::trace_flux, "Closed integral of f . n")
      .def(
          "interpolate",
          [](const data::CauchyData& d, const py::array_t<double>& theta) {
            const data::TraceInterpolant s(d);
            auto t = theta.unchecked();
            Points out(t.size(), 2);
            const double* p = theta.data();
            for (py::ssize_t i = 0; i < t.size(); ++i) out.row(i) = s(p[i]).transpose();
            return out;
          },
          py::arg("theta"), "Periodic cubic spline at the given angles")
      .def("save", [](const data::CauchyData& d, const std::filesystem::path& p) { data::write_cauchy_data(p, d); })
      .def_static(
          "load",
          [](const std::filesystem::path& p, const std::string& g) {
            return data::read_cauchy_data(p, data::TraceRule::parse(g));
          },
          py::arg("path"), py::arg("g") = "rotational");

  m.def(
      "generate_measurement",
      [](const py::object& truth, double alpha, const std::string& g, int sigma_nodes, int gamma_nodes,
         int refinement) {
        return data::generate_measurement(as_curves(truth), data::TraceRule::parse(g), alpha,
                                          data::measurement_options(sigma_nodes, gamma_nodes, refinement))
            .data;
      },
      py::arg("truth"), py::arg("alpha") = 1.0, py::arg("g") = "rotational", py::arg("sigma_nodes") = 100,
      py::arg("gamma_nodes") = 70, py::arg("refinement") = 4,
      "Noiseless Dirichlet data on a mesh `refinement` times finer than the given inversion resolution");
  m.def("add_noise", &data::add_noise, py::arg("data"), py::arg("delta"), py::arg("seed") = 0);

  // inverse
  m.def(
      "evaluate_cost",
      [](const TriangleMesh& mesh, const data::CauchyData& d, double alpha) {
        const auto c = inverse::evaluate(mesh, inverse::make_ccbm_data(d, alpha), false).cost;
        py::dict out;
        out["J"] = c.J;
        out["u_i_norm_sq"] = c.u_i_norm_sq;
        out["p_i_norm_sq"] = c.p_i_norm_sq;
        return out;
      },
      py::arg("mesh"), py::arg("data"), py::arg("alpha") = 1.0);
  m.def("ls_misfit", &inverse::evaluate_ls_cost_diagnostic, py::arg("mesh"), py::arg("alpha"), py::arg("data"),
        "Boundary least-squares misfit of the mixed problem (diagnostic)");
  m.def(
      "shape_gradient",
      [](const TriangleMesh& mesh, const data::CauchyData& d, double alpha, const std::string& scheme) {
        const auto ev = inverse::evaluate(mesh, inverse::make_ccbm_data(d, alpha), true);
        const auto G = inverse::shape_gradient(mesh, ev, alpha, inverse::gradient_scheme_from_string(scheme));
        Points x(static_cast<Eigen::Index>(G.samples.size()), 2), n(x.rows(), 2);
        Eigen::VectorXd g(x.rows()), w(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const auto& s = G.samples[static_cast<std::size_t>(i)];
          x.row(i) = s.x.transpose();
          n.row(i) = s.normal.transpose();
          g[i] = s.G;
          w[i] = s.weight;
        }
        py::dict out;
        out["points"] = x;
        out["normals"] = n;
        out["G"] = g;
        out["weights"] = w;
        out["nodal"] = py::array(py::cast(G.nodal));
        out["J"] = ev.cost.J;
        return out;
      },
      py::arg("mesh"), py::arg("data"), py::arg("alpha") = 1.0, py::arg("scheme") = "recovered",
      "Shape gradient density G at the obstacle quadrature points");
  m.def(
      "gradient_check",
      [](const TriangleMesh& mesh, const data::CauchyData& d, double alpha, int fields, double t, std::uint64_t seed) {
        inverse::GradientCheckOptions o;
        o.fields = fields;
        o.t = t;
        o.seed = seed;
        py::list out;
        for (const auto& f : inverse::gradient_check(mesh, inverse::make_ccbm_data(d, alpha), o).fields) {
          py::dict r;
          r["index"] = f.index;
          r["analytic"] = f.analytic;
          r["fd"] = f.fd;
          r["mismatch"] = f.mismatch;
          r["sweep_fd"] = f.sweep_fd;
          r["fd_limit"] = f.fd_limit;
          r["observed_order"] = f.observed_order;
          r["sweep_converges"] = f.sweep_converges;
          out.append(r);
        }
        return out;
      },
      py::arg("mesh"), py::arg("data"), py::arg("alpha") = 1.0, py::arg("fields") = 5, py::arg("t") = 1e-4,
      py::arg("seed") = 0, "Shape gradient against central finite differences of J");
  m.def(
      "reconstruct",
      [](const data::CauchyData& d, const py::object& initial, const py::object& truth, double alpha, int max_iters,
         double eta, double mu, int remesh_every, int sigma_nodes, int gamma_nodes,
         const std::function<void(int, double)>& callback) {
        inverse::ReconstructionSetup s;
        s.alpha = alpha;
        s.descent.max_iters = max_iters;
        s.descent.eta = eta;
        s.descent.mu = mu;
        s.descent.remesh_every = remesh_every;
        s.descent.validate();
        s.sigma_nodes = sigma_nodes;
        s.gamma_nodes = gamma_nodes;
        if (!truth.is_none()) s.truth = as_curves(truth);
        if (callback) s.on_iterate = [&](const inverse::IterationRecord& r, const TriangleMesh&) { callback(r.iter, r.J); };
        const std::vector<BoundaryCurve> init = as_curves(initial);
        inverse::ReconstructionResult r;
        if (callback) {
          r = inverse::run_reconstruction(s, d, init);
        } else {
          py::gil_scoped_release release;
          r = inverse::run_reconstruction(s, d, init);
        }
        py::dict out;
        out["history"] = history_dict(r.history);
        out["termination"] = inverse::to_string(r.termination);
        out["error"] = r.error;
        out["initial_mesh"] = r.initial_mesh;
        out["final_mesh"] = r.final_mesh;
        out["shape"] = to_arrays(geometry::obstacle_polylines(r.final_mesh));
        return out;
      },
      py::arg("data"), py::arg("initial"), py::arg("truth") = py::none(), py::arg("alpha") = 1.0,
      py::arg("max_iters") = 300, py::arg("eta") = 0.5, py::arg("mu") = 0.5, py::arg("remesh_every") = 0,
      py::arg("sigma_nodes") = 100, py::arg("gamma_nodes") = 70, py::arg("callback") = nullptr,
      "Shape descent from the initial obstacles; errors end the run with termination 'error'");

  // experiments
  m.def(
      "parse_config", [](const std::string& text) { return app::to_text(app::parse_config(text)); },
      py::arg("text"), "Validates a configuration and returns it with every default filled in");
  m.def(
      "run_experiment",
      [](const std::string& config, const std::filesystem::path& out_dir, std::optional<int> max_iters,
         std::optional<std::uint64_t> seed) {
        const std::filesystem::path as_path(config);
        const app::RunConfig c = config.find('\n') == std::string::npos && std::filesystem::exists(as_path)
                                     ? app::load_config(as_path)
                                     : app::parse_config(config);
        app::RunOptions o;
        o.max_iters = max_iters;
        o.seed = seed;
        app::RunSummary s;
        {
          py::gil_scoped_release release;
          s = app::run_experiment(c, out_dir, o);
        }
        return summary_dict(s);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("max_iters") = py::none(), py::arg("seed") = py::none(),
      "Runs a configuration (file path or text) and writes its artifacts to out_dir");
  m.def(
      "run_gallery",
      [](const std::filesystem::path& dir, const std::filesystem::path& out, int jobs) {
        std::vector<app::RunSummary> rs;
        {
          py::gil_scoped_release release;
          rs = app::run_gallery(dir, out, jobs);
        }
        py::list l;
        for (const auto& s : rs) l.append(summary_dict(s));
        return l;
      },
      py::arg("configs_dir"), py::arg("out_dir"), py::arg("jobs") = 1);
  m.def(
      "mms_study",
      [](int refinements) {
        const fem::MmsStudy s = fem::run_mms_study(refinements);
        py::list levels, rates;
        for (const auto& l : s.levels) {
          levels.append(py::dict(py::arg("triangles") = l.triangles, py::arg("h") = l.h,
                                 py::arg("velocity_l2") = l.errors.velocity_l2,
                                 py::arg("velocity_h1") = l.errors.velocity_h1,
                                 py::arg("pressure_l2") = l.errors.pressure_l2));
        }
        for (const auto& r : s.rates) {
          rates.append(py::dict(py::arg("velocity_l2") = r.velocity_l2, py::arg("velocity_h1") = r.velocity_h1,
                                py::arg("pressure_l2") = r.pressure_l2));
        }
        return py::dict(py::arg("levels") = levels, py::arg("rates") = rates);
      },
      py::arg("refinements") = 3, "Manufactured-solution convergence study on the annulus");
}
