#include "ccbm/app/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "ccbm/errors.hpp"
#include "ccbm/geometry/mesh_io.hpp"
#include "ccbm/geometry/mesher.hpp"

namespace ccbm::app {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string history_line(const inverse::IterationRecord& r) {
  return std::to_string(r.iter) + "," + fmt(r.J) + "," + fmt(r.ui_norm) + "," + fmt(r.pi_norm) + "," +
         fmt(r.grad_norm) + "," + fmt(r.step) + "," + fmt(r.hausdorff) + "," + std::to_string(r.backtracks);
}

std::string shape_name(int iter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%04d.txt", iter);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_summary(const fs::path& path, const RunSummary& s, const RunConfig& c) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "name = " << s.name << "\n"
      << "termination = " << inverse::to_string(s.termination) << "\n"
      << "iterations = " << s.iterations << "\n"
      << "final_J = " << fmt(s.final_J) << "\n"
      << "final_hausdorff = " << fmt(s.final_hausdorff) << "\n"
      << "noise = " << fmt(c.noise) << "\n"
      << "seed = " << c.seed << "\n"
      << "wall_time_s = " << fmt(s.wall_time) << "\n";
}

}  // namespace

RunConfig apply_overrides(RunConfig config, const RunOptions& options) {
  if (options.max_iters) config.descent.max_iters = *options.max_iters;
  if (options.seed) config.seed = *options.seed;
  config.validate();
  return config;
}

data::Measurement make_measurement(const RunConfig& config) {
  config.validate();
  data::Measurement m = data::generate_measurement(
      config.truth, config.g, config.alpha,
      data::measurement_options(config.sigma_nodes, config.gamma_nodes, config.refinement));
  m.data = data::add_noise(m.data, config.noise, config.seed);
  return m;
}

RunSummary run_experiment(const RunConfig& config_in, const fs::path& out_dir, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.name = config_in.name;
  summary.noise = config_in.noise;
  summary.final_hausdorff = std::numeric_limits<double>::quiet_NaN();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  auto fail = [&](const std::string& message) {
    summary.ok = false;
    summary.termination = inverse::Termination::error;
    summary.error = message;
    summary.wall_time = elapsed();
    std::ofstream err(out_dir / "error.txt");
    if (err) err << message << "\n";
    if (options.log) *options.log << "[" << summary.name << "] error: " << message << "\n";
    return summary;
  };

  std::error_code ec;
  fs::create_directories(out_dir / "shapes", ec);
  if (ec) {
    summary.error = "cannot create output directory " + out_dir.string() + ": " + ec.message();
    return summary;
  }
  fs::remove(out_dir / "error.txt", ec);
  fs::remove(out_dir / "summary.txt", ec);

  try {
    const RunConfig config = apply_overrides(config_in, options);
    write_text(out_dir / "config.ini", to_text(config));

    const data::Measurement m = make_measurement(config);
    data::write_cauchy_data(out_dir / "data.txt", m.data);
    if (options.log) {
      *options.log << "[" << summary.name << "] data: " << m.data.theta.size() << " samples, flux " << m.flux
                   << ", noise " << config.noise << "\n";
    }

    std::ofstream history(out_dir / "history.csv");
    if (!history) throw Error("cannot write history.csv");
    history << kHistoryHeader << "\n";

    inverse::ReconstructionSetup setup;
    setup.descent = config.descent;
    setup.alpha = config.alpha;
    setup.sigma_nodes = config.sigma_nodes;
    setup.gamma_nodes = config.gamma_nodes;
    setup.truth = config.truth;
    const fs::path shapes = out_dir / "shapes";
    int last_logged = -1;
    geometry::TriangleMesh last_mesh;
    int last_iter = -1;
    setup.on_iterate = [&](const inverse::IterationRecord& r, const geometry::TriangleMesh& mesh) {
      history << history_line(r) << "\n";
      history.flush();
      if (r.iter % config.log_every == 0) {
        geometry::write_polylines(shapes / shape_name(r.iter), geometry::obstacle_polylines(mesh));
        last_logged = r.iter;
      }
      last_mesh = mesh;
      last_iter = r.iter;
      if (options.log) {
        *options.log << "[" << summary.name << "] iter " << r.iter << "  J " << r.J << "  |G| " << r.grad_norm
                     << "  step " << r.step << "  H " << r.hausdorff << (r.remeshed ? "  remeshed (eps_J skipped)" : "")
                     << "\n";
      }
    };

    const inverse::ReconstructionResult result = inverse::run_reconstruction(setup, m.data, config.initial);
    if (last_iter >= 0 && last_logged != last_iter) {
      geometry::write_polylines(shapes / shape_name(last_iter), geometry::obstacle_polylines(last_mesh));
    }
    if (!result.initial_mesh.vertices.empty()) geometry::write_mesh(out_dir / "mesh_initial.txt", result.initial_mesh);
    if (!result.final_mesh.vertices.empty()) geometry::write_mesh(out_dir / "mesh_final.txt", result.final_mesh);
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      summary.iterations = last.iter;
      summary.final_J = last.J;
      summary.final_hausdorff = last.hausdorff;
    }
    if (result.termination == inverse::Termination::error) return fail(result.error);
    summary.ok = true;
    summary.termination = result.termination;
    summary.wall_time = elapsed();
    write_summary(out_dir / "summary.txt", summary, config);
    if (options.log) {
      *options.log << "[" << summary.name << "] done: " << inverse::to_string(summary.termination) << " after "
                   << summary.iterations << " iterations, J " << summary.final_J << ", H " << summary.final_hausdorff
                   << "\n";
    }
    return summary;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

std::vector<RunSummary> run_gallery(const fs::path& configs_dir, const fs::path& out_dir, int jobs,
                                    const RunOptions& options) {
  if (!fs::is_directory(configs_dir)) throw ConfigurationError("not a directory: " + configs_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(configs_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ini") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(out_dir);

  std::vector<RunSummary> results(files.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const std::string stem = files[i].stem().string();
      try {
        const RunConfig config = load_config(files[i]);
        const fs::path dir = out_dir / (config.name.empty() ? stem : config.name);
        RunOptions local = options;
        local.log = nullptr;
        results[i] = run_experiment(config, dir, local);
      } catch (const std::exception& e) {
        results[i].name = stem;
        results[i].error = e.what();
        results[i].final_hausdorff = std::numeric_limits<double>::quiet_NaN();
      }
      if (results[i].name.empty()) results[i].name = stem;
      if (options.log) {
        const std::lock_guard lock(log_mutex);
        *options.log << "[" << results[i].name << "] "
                     << (results[i].ok ? inverse::to_string(results[i].termination) : "error: " + results[i].error)
                     << "\n";
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(files.size(), 1))));
  std::vector<std::thread> threads;
  for (int k = 1; k < n; ++k) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::ofstream csv(out_dir / "gallery.csv");
  if (!csv) throw Error("cannot write gallery.csv");
  csv << "case,delta,final_J,final_hausdorff,iters,termination,status\n";
  for (const auto& r : results) {
    std::string status = r.ok ? "ok" : "error";
    csv << r.name << "," << fmt(r.noise) << "," << fmt(r.final_J) << "," << fmt(r.final_hausdorff) << ","
        << r.iterations << "," << (r.ok ? inverse::to_string(r.termination) : "error") << "," << status << "\n";
  }
  return results;
}

}  // namespace ccbm::app
