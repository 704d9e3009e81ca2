#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ccbm/app/config.hpp"
#include "ccbm/app/experiment.hpp"
#include "ccbm/errors.hpp"
#include "ccbm/fem/mms.hpp"
#include "ccbm/geometry/mesher.hpp"
#include "ccbm/inverse/gradient_check.hpp"

namespace fs = std::filesystem;
using namespace ccbm;

namespace {

struct Flags {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  bool quiet = false;
  int jobs = 1;
};

fs::path output_dir(const Flags& f, const app::RunConfig& c) {
  if (!f.out.empty()) return f.out;
  if (!c.output_dir.empty()) return c.output_dir;
  return fs::path("runs") / (c.name.empty() ? "run" : c.name);
}

app::RunOptions run_options(const Flags& f) {
  app::RunOptions o;
  o.max_iters = f.max_iters;
  o.seed = f.seed;
  o.log = f.quiet ? nullptr : &std::cerr;
  return o;
}

int generate_data(const std::string& path, const Flags& f) {
  const app::RunConfig config = app::apply_overrides(app::load_config(path), run_options(f));
  const fs::path out = output_dir(f, config);
  fs::create_directories(out);
  const data::Measurement m = app::make_measurement(config);
  data::write_cauchy_data(out / "data.txt", m.data);
  std::ofstream(out / "config.ini") << app::to_text(config);
  if (!f.quiet) {
    std::cout << "samples " << m.data.theta.size() << "\nflux " << m.flux << "\nnoise " << config.noise
              << "\ndata mesh " << m.mesh_vertices << " vertices, " << m.mesh_triangles << " triangles\n"
              << "wrote " << (out / "data.txt").string() << "\n";
  }
  return 0;
}

int reconstruct(const std::string& path, const Flags& f) {
  const app::RunConfig config = app::load_config(path);
  const app::RunSummary s = app::run_experiment(config, output_dir(f, config), run_options(f));
  if (!s.ok) {
    std::cerr << "error: " << s.error << "\n";
    return 1;
  }
  std::cout << "termination " << inverse::to_string(s.termination) << "\niterations " << s.iterations << "\nfinal_J "
            << s.final_J << "\nfinal_hausdorff " << s.final_hausdorff << "\n";
  return 0;
}

int gallery(const std::string& dir, const Flags& f) {
  const fs::path out = f.out.empty() ? fs::path("runs") / "gallery" : fs::path(f.out);
  const auto results = app::run_gallery(dir, out, f.jobs, run_options(f));
  int failed = 0;
  for (const auto& r : results) failed += r.ok ? 0 : 1;
  std::cout << results.size() << " cases, " << failed << " failed; summary in " << (out / "gallery.csv").string()
            << "\n";
  return 0;
}

int gradient_check(const std::string& path, const Flags& f) {
  const app::RunConfig config = app::apply_overrides(app::load_config(path), run_options(f));
  const data::Measurement m = app::make_measurement(config);
  geometry::MeshOptions mo;
  mo.sigma_nodes = config.sigma_nodes;
  mo.gamma_nodes = config.gamma_nodes;
  const geometry::TriangleMesh mesh = geometry::generate_annulus_mesh(config.initial, mo);
  data::check_no_inverse_crime(m.data, config.sigma_nodes);
  inverse::GradientCheckOptions opts;
  opts.seed = config.seed;
  opts.scheme = config.descent.scheme;
  const auto report = inverse::gradient_check(mesh, inverse::make_ccbm_data(m.data, config.alpha), opts);

  std::ostringstream csv;
  csv << "field,analytic,fd,mismatch";
  for (double t : opts.sweep) csv << ",fd_t" << t;
  csv << ",fd_limit,floor_mismatch,observed_order,sweep_converges\n";
  char line[512];
  if (!f.quiet) std::printf("%5s %14s %14s %10s %10s %6s\n", "field", "<Gn,V>", "FD", "mismatch", "floor", "order");
  bool ok = true;
  for (const auto& fc : report.fields) {
    csv << fc.index << "," << fc.analytic << "," << fc.fd << "," << fc.mismatch;
    for (double v : fc.sweep_fd) csv << "," << v;
    csv << "," << fc.fd_limit << "," << fc.floor_mismatch << "," << fc.observed_order << ","
        << (fc.sweep_converges ? 1 : 0) << "\n";
    ok = ok && fc.mismatch <= 0.02 && fc.sweep_converges;
    if (!f.quiet) {
      std::snprintf(line, sizeof line, "%5d %14.6e %14.6e %10.3e %10.3e %6.2f\n", fc.index, fc.analytic, fc.fd,
                    fc.mismatch, fc.floor_mismatch, fc.observed_order);
      std::cout << line;
    }
  }
  const fs::path out = output_dir(f, config);
  fs::create_directories(out);
  std::ofstream(out / "gradient_check.csv") << csv.str();
  std::cout << (ok ? "PASS" : "FAIL") << " max mismatch " << report.max_mismatch << "\n";
  return ok ? 0 : 1;
}

int mms_check(const Flags& f) {
  const fem::MmsStudy study = fem::run_mms_study();
  std::ostringstream csv;
  csv << "triangles,h,velocity_l2,velocity_h1,pressure_l2\n";
  for (const auto& l : study.levels) {
    csv << l.triangles << "," << l.h << "," << l.errors.velocity_l2 << "," << l.errors.velocity_h1 << ","
        << l.errors.pressure_l2 << "\n";
  }
  bool ok = !study.rates.empty();
  for (const auto& r : study.rates) {
    ok = ok && r.velocity_h1 >= 1.8 && r.velocity_l2 >= 2.7 && r.pressure_l2 >= 1.8;
    if (!f.quiet) {
      std::printf("rates: velocity L2 %.3f  velocity H1 %.3f  pressure L2 %.3f\n", r.velocity_l2, r.velocity_h1,
                  r.pressure_l2);
    }
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    std::ofstream(fs::path(f.out) / "mms.csv") << csv.str();
  }
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obstacle reconstruction for Stokes flow from boundary measurements"};
  app.require_subcommand(1);
  Flags flags;
  std::string target;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--seed", flags.seed, "Override the configured seed");
    cmd->add_option("--max-iters", flags.max_iters, "Override the iteration limit")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
  };
  auto* gen = app.add_subcommand("generate-data", "Generate synthetic boundary data for a configuration");
  gen->add_option("config", target, "Configuration file")->required()->check(CLI::ExistingFile);
  add_common(gen);
  auto* rec = app.add_subcommand("reconstruct", "Generate data and run the shape descent");
  rec->add_option("config", target, "Configuration file")->required()->check(CLI::ExistingFile);
  add_common(rec);
  auto* gal = app.add_subcommand("gallery", "Run every configuration of a directory");
  gal->add_option("dir", target, "Directory of *.ini configurations")->required()->check(CLI::ExistingDirectory);
  gal->add_option("--jobs", flags.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  add_common(gal);
  auto* grad = app.add_subcommand("gradient-check", "Compare the shape gradient with finite differences");
  grad->add_option("config", target, "Configuration file")->required()->check(CLI::ExistingFile);
  add_common(grad);
  auto* mms = app.add_subcommand("mms-check", "Manufactured-solution convergence study");
  add_common(mms);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return generate_data(target, flags);
    if (*rec) return reconstruct(target, flags);
    if (*gal) return gallery(target, flags);
    if (*grad) return gradient_check(target, flags);
    if (*mms) return mms_check(flags);
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
