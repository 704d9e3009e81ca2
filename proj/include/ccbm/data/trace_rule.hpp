#pragma once

#include <string>
#include <vector>

#include "ccbm/fem/assembly.hpp"

namespace ccbm::data {

/// Symbolic boundary data on the outer circle.
///   rotational         (sin theta, -cos theta)
///   constant gx gy     (gx, gy)
///   zero               (0, 0)
struct TraceRule {
  std::string name = "rotational";
  std::vector<double> parameters;

  /// Throws ConfigurationError for unknown names or wrong parameter counts.
  [[nodiscard]] fem::BoundaryTraceFn function() const;
  /// "name p1 p2 ..."
  [[nodiscard]] std::string to_string() const;
  static TraceRule parse(const std::string& text);
};

}  // namespace ccbm::data
