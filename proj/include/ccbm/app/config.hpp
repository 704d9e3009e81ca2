#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ccbm/data/trace_rule.hpp"
#include "ccbm/geometry/curve.hpp"
#include "ccbm/inverse/ccbm.hpp"

namespace ccbm::app {

/// One experiment. Text form (INI-style, '#' or ';' comments):
///
///   [truth]    curve = circle 0 0 0.5          several obstacles: separate with '|'
///   [initial]  curve = circle 0 0 0.3
///   [data]     g = rotational, alpha = 1, noise = 0, seed = 0, refinement = 4
///   [mesh]     sigma_nodes = 100, gamma_nodes = 70
///   [descent]  eta, mu, eps_J, eps_T, max_iters, remesh_every, max_halvings, gradient
///   [output]   name, dir, log_every
///
/// Every key except the two curves is optional.
struct RunConfig {
  std::vector<geometry::BoundaryCurve> truth;
  std::vector<geometry::BoundaryCurve> initial;
  data::TraceRule g;
  double alpha = 1.0;
  /// Relative noise level delta.
  double noise = 0.0;
  std::uint64_t seed = 0;
  /// Data mesh resolution = refinement x inversion resolution.
  int refinement = 4;
  int sigma_nodes = 100;
  int gamma_nodes = 70;
  inverse::DescentConfig descent;
  std::string name;
  /// Empty: chosen by the caller.
  std::filesystem::path output_dir;
  /// Shape polylines are written every log_every iterations (and for the last one).
  int log_every = 1;

  /// Throws ConfigurationError naming the offending key.
  void validate() const;
};

/// Throws ConfigurationError for syntax errors, unknown keys, type mismatches
/// and invariant violations; the message names the key as "section.key".
RunConfig parse_config(std::string_view text);
/// parse_config on the file contents; name defaults to the file stem.
RunConfig load_config(const std::filesystem::path& path);
/// Text that parse_config maps back to an equal configuration.
std::string to_text(const RunConfig& config);

}  // namespace ccbm::app
