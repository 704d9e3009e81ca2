#pragma once

#include <cstdint>
#include <vector>

#include "ccbm/inverse/ccbm.hpp"

namespace ccbm::inverse {

/// V = (1 - |x|^2) (a0 + a1 x + a2 y + a3 xy + a4 x^2 + a5 y^2) per component,
/// standard normal coefficients from (seed, test_fields, index); zero on Sigma.
DeformationField random_smooth_field(const TriangleMesh& mesh, std::uint64_t seed, int index);

struct GradientCheckOptions {
  int fields = 5;
  double t = 1e-4;
  /// Decreasing step sizes for the Richardson sweep (at least 3).
  std::vector<double> sweep = {1e-3, 5e-4, 2.5e-4};
  std::uint64_t seed = 0;
  GradientScheme scheme = GradientScheme::recovered;
};

struct FieldCheck {
  int index = 0;
  /// <G n, V>_Gamma.
  double analytic = 0.0;
  double fd = 0.0;
  /// |analytic - fd| / max(|fd|, 1e-12)
  double mismatch = 0.0;
  std::vector<double> sweep_fd;
  std::vector<double> sweep_mismatch;
  /// Richardson limit of the sweep and the observed order of the last two
  /// differences.
  double fd_limit = 0.0;
  double observed_order = 0.0;
  /// Mismatch of the analytic value against fd_limit (the discretization floor).
  double floor_mismatch = 0.0;
  /// |FD(t) - fd_limit| strictly decreases along the sweep.
  bool sweep_converges = false;
};

struct GradientCheckReport {
  std::vector<FieldCheck> fields;
  double max_mismatch = 0.0;
};

/// Compares the shape gradient with central differences of J. Throws
/// SolverError when a deformed mesh is invalid.
GradientCheckReport gradient_check(const TriangleMesh& mesh, const CcbmData& data,
                                   const GradientCheckOptions& options = {});

}  // namespace ccbm::inverse
