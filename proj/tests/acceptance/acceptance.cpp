// Acceptance runner: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccbm/app/config.hpp"
#include "ccbm/app/experiment.hpp"
#include "ccbm/data/cauchy_data.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/fem/mms.hpp"
#include "ccbm/fem/postprocess.hpp"
#include "ccbm/geometry/mesh_io.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/geometry/polygon.hpp"
#include "ccbm/inverse/ccbm.hpp"
#include "ccbm/inverse/gradient_check.hpp"

namespace fs = std::filesystem;
using namespace ccbm;
using geometry::BoundaryCurve;
using geometry::TriangleMesh;

namespace {

// Frozen: 10 x J(true circle) = 10 x 8.82e-10 at 100/70 with 4x data.
constexpr double kSelfConsistencyTol = 8.8e-9;

template <class... A>
std::string format(const char* f, A... args) {
  if constexpr (sizeof...(A) == 0) {
    return f;
  } else {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
  }
}

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  void note(const char* f, auto... args) { lines.push_back(format(f, args...)); }
  void require(bool ok, const char* f, auto... args) {
    lines.push_back(std::string(ok ? "ok    " : "FAIL  ") + format(f, args...));
    pass = pass && ok;
  }
};

struct Run {
  app::RunSummary summary;
  std::vector<double> J;
  std::vector<double> hausdorff;
  TriangleMesh initial_mesh;
  TriangleMesh final_mesh;
  fs::path dir;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Suite {
 public:
  explicit Suite(fs::path out) : out_(std::move(out)) { fs::create_directories(out_); }

  const Run& run(const std::string& name, const std::string& text) {
    auto it = runs_.find(name);
    if (it != runs_.end()) return it->second;
    app::RunConfig c = app::parse_config(text);
    c.name = name;
    Run r;
    r.dir = out_ / "runs" / name;
    r.summary = app::run_experiment(c, r.dir);
    std::istringstream history(slurp(r.dir / "history.csv"));
    std::string line;
    std::getline(history, line);
    while (std::getline(history, line)) {
      std::vector<std::string> cols;
      std::stringstream ls(line);
      for (std::string c2; std::getline(ls, c2, ',');) cols.push_back(c2);
      if (cols.size() < 8) continue;
      r.J.push_back(std::stod(cols[1]));
      r.hausdorff.push_back(std::stod(cols[6]));
    }
    if (fs::exists(r.dir / "mesh_initial.txt")) r.initial_mesh = geometry::read_mesh(r.dir / "mesh_initial.txt");
    if (fs::exists(r.dir / "mesh_final.txt")) r.final_mesh = geometry::read_mesh(r.dir / "mesh_final.txt");
    std::fprintf(stderr, "  [%s] %s, %d iterations, J %.3e, H %.4f, %.1f s\n", name.c_str(),
                 r.summary.ok ? inverse::to_string(r.summary.termination).c_str() : r.summary.error.c_str(),
                 r.summary.iterations, r.summary.final_J, r.summary.final_hausdorff, r.summary.wall_time);
    return runs_.emplace(name, std::move(r)).first->second;
  }

  const fs::path& out() const { return out_; }

 private:
  fs::path out_;
  std::map<std::string, Run> runs_;
};

const std::string kCircle = "[truth]\ncurve = circle 0 0 0.5\n[initial]\ncurve = circle 0 0 0.3\n";
const std::string kPeanut = "[truth]\ncurve = peanut_c1\n[initial]\ncurve = circle 0 0 0.3\n";
const std::string kStar = "[truth]\ncurve = star_c4\n[initial]\ncurve = circle 0 0 0.3\n";
const std::string kCircleNoisy = kCircle + "[data]\nnoise = 0.15\nseed = 0\n";
const std::string kSmallNoisy =
    "[truth]\ncurve = circle 0 0 0.25\n[initial]\ncurve = circle 0 0 0.3\n[data]\nnoise = 0.15\nseed = 0\n";

data::CauchyData circle_data() {
  return app::make_measurement(app::parse_config(kCircle)).data;
}

TriangleMesh inversion_mesh(const BoundaryCurve& c) {
  geometry::MeshOptions o;
  o.sigma_nodes = 100;
  o.gamma_nodes = 70;
  return geometry::generate_annulus_mesh(std::span(&c, 1), o);
}

// 1 -------------------------------------------------------------------------
Report mms(Suite&) {
  Report r;
  const fem::MmsStudy s = fem::run_mms_study(3);
  for (const auto& l : s.levels) {
    r.note("%6d triangles  h %.4f  |u|L2 %.3e  |u|H1 %.3e  |p|L2 %.3e", l.triangles, l.h, l.errors.velocity_l2,
           l.errors.velocity_h1, l.errors.pressure_l2);
  }
  r.require(s.rates.size() == 3, "3 refinements");
  for (const auto& k : s.rates) {
    r.require(k.velocity_h1 >= 1.8 && k.velocity_l2 >= 2.7 && k.pressure_l2 >= 1.8,
              "rates: velocity H1 %.2f (>= 1.8), velocity L2 %.2f (>= 2.7), pressure L2 %.2f (>= 1.8)",
              k.velocity_h1, k.velocity_l2, k.pressure_l2);
  }
  return r;
}

// 2 -------------------------------------------------------------------------
Report gradient(Suite& suite) {
  Report r;
  const TriangleMesh mesh = inversion_mesh(BoundaryCurve::circle(0.0, 0.0, 0.3));
  inverse::GradientCheckOptions o;
  const auto rep = inverse::gradient_check(mesh, inverse::make_ccbm_data(circle_data(), 1.0), o);
  std::ofstream csv(suite.out() / "gradient_check.csv");
  csv << "field,analytic,fd,mismatch,fd_t1e-3,fd_t5e-4,fd_t2.5e-4,fd_limit,observed_order\n";
  csv.precision(17);
  for (const auto& f : rep.fields) {
    csv << f.index << "," << f.analytic << "," << f.fd << "," << f.mismatch;
    for (double v : f.sweep_fd) csv << "," << v;
    csv << "," << f.fd_limit << "," << f.observed_order << "\n";
    r.require(f.mismatch <= 0.02, "field %d: <Gn,V> %.6e  FD(1e-4) %.6e  mismatch %.3f%% (<= 2%%)", f.index,
              f.analytic, f.fd, 100.0 * f.mismatch);
    r.require(f.sweep_converges,
              "field %d: sweep |FD(t)-FD*| %.2e %.2e %.2e decreasing, order %.2f; mismatch %.3f%% %.3f%% %.3f%%",
              f.index, std::abs(f.sweep_fd[0] - f.fd_limit), std::abs(f.sweep_fd[1] - f.fd_limit),
              std::abs(f.sweep_fd[2] - f.fd_limit), f.observed_order, 100.0 * f.sweep_mismatch[0],
              100.0 * f.sweep_mismatch[1], 100.0 * f.sweep_mismatch[2]);
  }
  r.require(rep.fields.size() == 5, "5 seeded random fields");
  return r;
}

// 3 -------------------------------------------------------------------------
Report self_consistency(Suite&) {
  Report r;
  const inverse::CcbmData d = inverse::make_ccbm_data(circle_data(), 1.0);
  const double jt = inverse::evaluate(inversion_mesh(BoundaryCurve::circle(0.0, 0.0, 0.5)), d, false).cost.J;
  const double jw = inverse::evaluate(inversion_mesh(BoundaryCurve::circle(0.0, 0.0, 0.3)), d, false).cost.J;
  r.require(jt <= kSelfConsistencyTol, "J(true circle) %.4e <= self_consistency_tol %.1e", jt, kSelfConsistencyTol);
  r.require(jt <= 0.01 * jw, "J(true) / J(r = 0.3) = %.3e / %.3e = %.2e <= 1e-2", jt, jw, jt / jw);
  return r;
}

// 4 -------------------------------------------------------------------------
Report circle(Suite& suite) {
  Report r;
  const Run& run = suite.run("circle", kCircle);
  r.require(run.summary.ok, "run completed (%s)", run.summary.ok ? "ok" : run.summary.error.c_str());
  r.require(run.summary.iterations <= 300, "%d iterations, termination %s", run.summary.iterations,
            inverse::to_string(run.summary.termination).c_str());
  r.require(run.summary.final_hausdorff <= 0.05, "final Hausdorff %.4f <= 0.05", run.summary.final_hausdorff);
  int ok = 0, total = 0;
  for (std::size_t k = 1; k < run.J.size(); ++k, ++total) ok += run.J[k] <= run.J[k - 1] + 1e-12 ? 1 : 0;
  const double frac = total ? static_cast<double>(ok) / total : 1.0;
  r.require(frac >= 0.95, "J nonincreasing (up to eps_J) in %d of %d iterations (%.1f%% >= 95%%)", ok, total,
            100.0 * frac);
  r.note("final J %.3e", run.summary.final_J);
  return r;
}

// 5 -------------------------------------------------------------------------
Report gallery(Suite& suite) {
  Report r;
  for (const auto& [name, text] : {std::pair{"peanut_c1", kPeanut}, std::pair{"star_c4", kStar}}) {
    const Run& run = suite.run(name, text);
    r.require(run.summary.ok, "%s: run completed in %d iterations (%s)", name, run.summary.iterations,
              run.summary.ok ? inverse::to_string(run.summary.termination).c_str() : run.summary.error.c_str());
    r.require(run.summary.final_hausdorff <= 0.15, "%s: final Hausdorff %.4f <= 0.15", name,
              run.summary.final_hausdorff);
    double ratio = 0.0;
    if (!run.final_mesh.vertices.empty()) {
      for (const auto& loop : geometry::obstacle_polylines(run.final_mesh)) {
        ratio = std::max(ratio, geometry::convex_hull_area_ratio(loop));
      }
    }
    r.require(ratio > 1.02, "%s: convex hull area ratio %.4f > 1.02", name, ratio);
  }
  return r;
}

// 6 -------------------------------------------------------------------------
Report noise(Suite& suite) {
  Report r;
  const Run& clean = suite.run("circle", kCircle);
  const Run& noisy = suite.run("circle_noise15", kCircleNoisy);
  const Run& small = suite.run("circle_r025_noise15", kSmallNoisy);
  for (const Run* run : {&clean, &noisy, &small}) {
    r.require(run->summary.ok, "%s: completed (%s)", run->summary.name.c_str(),
              run->summary.ok ? inverse::to_string(run->summary.termination).c_str() : run->summary.error.c_str());
  }
  r.require(noisy.summary.final_J > clean.summary.final_J, "final J: delta 15%% %.3e > noiseless %.3e",
            noisy.summary.final_J, clean.summary.final_J);
  r.require(small.summary.final_hausdorff >= noisy.summary.final_hausdorff,
            "final Hausdorff at delta 15%%: r = 0.25 %.4f >= r = 0.5 %.4f", small.summary.final_hausdorff,
            noisy.summary.final_hausdorff);
  return r;
}

// 7 -------------------------------------------------------------------------
double adjoint_compatibility_ratio(const TriangleMesh& m, const inverse::CcbmData& d) {
  const inverse::Evaluation ev = inverse::evaluate(m, d, true);
  const auto& v = *ev.adjoint;
  const Eigen::VectorXcd pi = ev.state.pressure.imag().cast<fem::Complex>();
  const double lhs = std::abs(fem::boundary_integral_flux(m, ev.dofs, v.velocity, geometry::BoundaryTag::sigma).real() +
                              fem::pressure_integral(m, pi).real());
  const double scale = std::sqrt(fem::velocity_l2_norm_sq(m, ev.dofs, v.velocity) +
                                 fem::velocity_h1_seminorm_sq(m, ev.dofs, v.velocity)) +
                       std::sqrt(fem::pressure_l2_norm_sq(m, pi));
  return lhs / scale;
}

// Relative defect of <Gn,V> = -(V^T A V) for the descent field.
std::pair<double, double> descent_identity(const TriangleMesh& m, const inverse::CcbmData& d) {
  const inverse::Evaluation ev = inverse::evaluate(m, d, true);
  const inverse::ShapeGradientDensity G = inverse::shape_gradient(m, ev, d.alpha);
  const geometry::DeformationField V = inverse::descent_field(m, G, 0.5);
  const Eigen::SparseMatrix<double> a = inverse::descent_matrix(m, 0.5);
  double energy = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd x(m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) x[i] = V.values[static_cast<std::size_t>(i)][c];
    energy += x.dot(a * x);
  }
  const double slope = G.directional_derivative(m, V);
  return {slope, std::abs(slope + energy) / std::max(energy, 1e-300)};
}

Report invariants(Suite& suite) {
  Report r;
  // Flux compatibility of noiseless data for every gallery truth.
  const std::vector<std::pair<std::string, std::vector<BoundaryCurve>>> truths = {
      {"circle", {BoundaryCurve::circle(0, 0, 0.5)}},
      {"ellipse", {BoundaryCurve::ellipse(0, 0, 0.6, 0.4)}},
      {"peanut_c1", {BoundaryCurve::catalog(geometry::CurveKind::peanut_c1)}},
      {"bean_c2", {BoundaryCurve::catalog(geometry::CurveKind::bean_c2)}},
      {"kite_c3", {BoundaryCurve::catalog(geometry::CurveKind::kite_c3)}},
      {"star_c4", {BoundaryCurve::catalog(geometry::CurveKind::star_c4)}},
      {"square", {BoundaryCurve::square(0, 0, 0.35)}},
      {"l_shape", {BoundaryCurve::l_shape(0, 0, 0.4)}},
      {"two_obstacles", {BoundaryCurve::circle(-0.45, 0, 0.25), BoundaryCurve::circle(0.45, 0, 0.25)}}};
  double worst_flux = 0.0;
  std::string worst_name;
  for (const auto& [name, curves] : truths) {
    const data::Measurement m = data::generate_measurement(curves, {}, 1.0, data::measurement_options(100, 70, 4));
    const double f = std::max(std::abs(m.flux), std::abs(data::trace_flux(m.data)));
    if (f >= worst_flux) {
      worst_flux = f;
      worst_name = name;
    }
  }
  r.require(worst_flux <= 1e-8, "data flux |int f.n| <= 1e-8 for %zu truths (worst %.2e, %s)", truths.size(),
            worst_flux, worst_name.c_str());

  // Noise scaling.
  const data::CauchyData clean = circle_data();
  double worst_noise = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double delta : {0.01, 0.05, 0.15, 0.5}) {
      const data::CauchyData n = data::add_noise(clean, delta, seed);
      data::CauchyData diff = clean;
      for (std::size_t k = 0; k < diff.size(); ++k) diff.f[k] = n.f[k] - clean.f[k];
      worst_noise = std::max(worst_noise, std::abs(data::trace_l2_norm(diff) / data::trace_l2_norm(clean) - delta));
    }
  }
  r.require(worst_noise <= 1e-12, "noise scaling |rel. perturbation - delta| %.2e <= 1e-12 (20 seeds x 4 levels)",
            worst_noise);

  // Adjoint compatibility and the descent identity on several shapes.
  const inverse::CcbmData d = inverse::make_ccbm_data(clean, 1.0);
  std::vector<std::pair<std::string, TriangleMesh>> meshes = {
      {"circle r=0.3", inversion_mesh(BoundaryCurve::circle(0, 0, 0.3))},
      {"circle r=0.5", inversion_mesh(BoundaryCurve::circle(0, 0, 0.5))},
      {"ellipse", inversion_mesh(BoundaryCurve::ellipse(0.1, 0.0, 0.4, 0.25))},
      {"kite", inversion_mesh(BoundaryCurve::catalog(geometry::CurveKind::kite_c3))}};
  const Run& circle_run = suite.run("circle", kCircle);
  if (!circle_run.final_mesh.vertices.empty()) meshes.emplace_back("circle run final", circle_run.final_mesh);
  double worst_adj = 0.0, worst_identity = 0.0, max_slope = -1e300;
  for (const auto& [name, m] : meshes) {
    worst_adj = std::max(worst_adj, adjoint_compatibility_ratio(m, d));
    const auto [slope, defect] = descent_identity(m, d);
    worst_identity = std::max(worst_identity, defect);
    max_slope = std::max(max_slope, slope);
  }
  r.require(worst_adj <= 1e-6, "adjoint compatibility |flux + int p_i| / (|v|H1 + |p_i|) %.2e <= 1e-6 (%zu meshes)",
            worst_adj, meshes.size());
  r.require(worst_identity <= 1e-9 && max_slope <= 0.0,
            "descent identity <Gn,V> = -(eta|grad V|^2 + (1-eta)|d_s V|^2): rel. defect %.2e, max slope %.3e <= 0",
            worst_identity, max_slope);

  // Stationarity at the truth.
  const TriangleMesh truth = inversion_mesh(BoundaryCurve::circle(0, 0, 0.5));
  const inverse::Evaluation et = inverse::evaluate(truth, d, true);
  const double gmax = inverse::shape_gradient(truth, et, 1.0).max_abs();
  r.require(gmax <= 10.0 * std::sqrt(kSelfConsistencyTol), "stationarity at truth |G|_inf %.2e <= %.2e", gmax,
            10.0 * std::sqrt(kSelfConsistencyTol));

  // Least-squares diagnostic separates truth from a wrong obstacle.
  const double ls_t = inverse::evaluate_ls_cost_diagnostic(truth, 1.0, clean);
  const double ls_w = inverse::evaluate_ls_cost_diagnostic(meshes[0].second, 1.0, clean);
  r.require(ls_t < ls_w && ls_t <= 10.0 * kSelfConsistencyTol,
            "least-squares misfit truth %.2e <= %.1e (10x self-consistency tol) and < wrong %.2e", ls_t,
            10.0 * kSelfConsistencyTol, ls_w);

  // Data convergence under refinement of the data mesh.
  const BoundaryCurve c05 = BoundaryCurve::circle(0, 0, 0.5);
  std::vector<data::CauchyData> levels;
  for (int f : {2, 4, 8}) levels.push_back(data::generate_measurement(std::span(&c05, 1), {}, 1.0,
                                                                      data::measurement_options(100, 70, f)).data);
  double diff[2] = {0.0, 0.0};
  for (int l = 0; l < 2; ++l) {
    const data::TraceInterpolant fine(levels[static_cast<std::size_t>(l + 1)]);
    const auto& coarse = levels[static_cast<std::size_t>(l)];
    for (std::size_t k = 0; k < coarse.size(); ++k) diff[l] = std::max(diff[l], (coarse.f[k] - fine(coarse.theta[k])).norm());
  }
  r.require(diff[0] / diff[1] >= 3.0, "data converge: max change %.2e then %.2e under refinement (ratio %.2f >= 3)",
            diff[0], diff[1], diff[0] / diff[1]);

  // Inverse crime guard.
  bool refused = false;
  try {
    data::check_no_inverse_crime(levels[0], 200);
  } catch (const ConfigurationError&) {
    refused = true;
  }
  r.require(refused, "inversion at the data resolution is refused");

  // Determinism: same config and seed, byte-identical artifacts.
  app::RunConfig dc = app::parse_config(kCircleNoisy + "[descent]\nmax_iters = 10\n");
  const fs::path a = suite.out() / "determinism" / "a", b = suite.out() / "determinism" / "b";
  fs::remove_all(a);
  fs::remove_all(b);
  const bool ran = app::run_experiment(dc, a).ok && app::run_experiment(dc, b).ok;
  bool same = ran;
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "summary.txt") continue;
    ++files;
    same = same && slurp(e.path()) == slurp(b / fs::relative(e.path(), a));
  }
  r.require(same, "determinism: %d artifacts byte-identical across two runs (wall time in summary excluded)", files);

  // Run artifacts: simple polylines and documented termination reasons.
  int loops = 0, bad_loops = 0;
  for (const auto& e : fs::recursive_directory_iterator(suite.out() / "runs")) {
    if (e.path().parent_path().filename() != "shapes") continue;
    for (const auto& loop : geometry::read_polylines(e.path())) {
      ++loops;
      bad_loops += geometry::is_simple_loop(loop) ? 0 : 1;
    }
  }
  r.require(bad_loops == 0 && loops > 0, "%d emitted shape polylines, %d not simple", loops, bad_loops);
  bool reasons = true;
  for (const auto& e : fs::recursive_directory_iterator(suite.out() / "runs")) {
    if (e.path().filename() != "summary.txt") continue;
    const std::string s = slurp(e.path());
    reasons = reasons && (s.find("termination = eps_J\n") != std::string::npos ||
                          s.find("termination = eps_T\n") != std::string::npos ||
                          s.find("termination = max_iters\n") != std::string::npos);
  }
  r.require(reasons, "every summary reports eps_J, eps_T or max_iters");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--out", out, "Directory for run artifacts");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Report(Suite&)>>> criteria = {
      {"MMS convergence (velocity H1 >= 1.8, L2 >= 2.7, pressure L2 >= 1.8)", mms},
      {"gradient certification (|<Gn,V> - FD| <= 2%, 5 fields, Richardson sweep)", gradient},
      {"self-consistency (J(truth) <= tol, <= 1% of J(r=0.3))", self_consistency},
      {"circle reconstruction (Hausdorff <= 0.05, monotone J >= 95%)", circle},
      {"nonconvex gallery C.I, C.IV (Hausdorff <= 0.15, hull ratio > 1.02)", gallery},
      {"noise orderings (J noisy > clean, H(r=0.25) >= H(r=0.5) at 15%)", noise},
      {"invariant suite", invariants}};
  const std::vector<double> budget = {120, 120, 60, 600, 1200, 1200, 0};

  Suite suite(out);
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    std::fprintf(stderr, "criterion %d ...\n", id);
    const auto start = std::chrono::steady_clock::now();
    Report r;
    try {
      r = criteria[i].second(suite);
    } catch (const std::exception& e) {
      r.require(false, "exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget[i] > 0.0) r.require(secs <= budget[i], "runtime %.1f s <= %.0f s", secs, budget[i]);
    char head[256];
    std::snprintf(head, sizeof head, "%s criterion %d: %s  [%.1f s]", r.pass ? "PASS" : "FAIL", id,
                  criteria[i].first.c_str(), secs);
    std::cout << head << "\n";
    for (const auto& l : r.lines) std::cout << "    " << l << "\n";
    std::cout.flush();
    summary.emplace_back(head);
    failed += r.pass ? 0 : 1;
  }
  std::cout << "\n";
  for (const auto& s : summary) std::cout << s << "\n";
  std::cout << (failed ? "FAILED" : "PASSED") << ": " << summary.size() - static_cast<std::size_t>(failed) << " of "
            << summary.size() << " criteria\n";
  return failed ? 1 : 0;
}
