#pragma once

#include <span>

#include "ccbm/geometry/polygon.hpp"

namespace ccbm::geometry {

/// Symmetric Hausdorff distance between two closed polylines, taken over all
/// points of the segments (not just the vertices). Throws ArgumentError if a
/// polyline is empty.
double hausdorff_distance(std::span<const Point> a, std::span<const Point> b);

/// Same for unions of closed loops.
double hausdorff_distance(std::span<const Polyline> a, std::span<const Polyline> b);

/// sup over x in a of dist(x, b).
double directed_hausdorff(std::span<const Polyline> a, std::span<const Polyline> b);

}  // namespace ccbm::geometry
