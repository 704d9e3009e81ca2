#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccbm/app/config.hpp"
#include "ccbm/data/cauchy_data.hpp"

namespace ccbm::app {

struct RunOptions {
  std::optional<int> max_iters;
  std::optional<std::uint64_t> seed;
  /// Progress lines go here unless null.
  std::ostream* log = nullptr;
};

struct RunSummary {
  std::string name;
  double noise = 0.0;
  bool ok = false;
  inverse::Termination termination = inverse::Termination::error;
  int iterations = 0;
  double final_J = 0.0;
  /// NaN when the run failed before the first iterate.
  double final_hausdorff = 0.0;
  double wall_time = 0.0;
  std::string error;
};

/// Applies the overrides of options to config.
RunConfig apply_overrides(RunConfig config, const RunOptions& options);

/// Synthetic, possibly noisy, measurement for config. Enforces the
/// data/inversion resolution separation.
data::Measurement make_measurement(const RunConfig& config);

/// Data generation plus reconstruction. Writes into out_dir:
///   config.ini, data.txt, history.csv, shapes/iter_NNNN.txt,
///   mesh_initial.txt, mesh_final.txt, and summary.txt on success or
///   error.txt on failure (artifacts written so far are kept).
RunSummary run_experiment(const RunConfig& config, const std::filesystem::path& out_dir,
                          const RunOptions& options = {});

/// Runs every *.ini under configs_dir (sorted by name) into out_dir/<name>,
/// jobs at a time, and writes out_dir/gallery.csv. A failing case is recorded
/// and the batch continues.
std::vector<RunSummary> run_gallery(const std::filesystem::path& configs_dir, const std::filesystem::path& out_dir,
                                    int jobs = 1, const RunOptions& options = {});

/// history.csv header.
inline constexpr const char* kHistoryHeader = "iter,J,ui_norm,pi_norm,grad_norm,step,hausdorff,backtracks";

}  // namespace ccbm::app
