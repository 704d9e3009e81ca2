#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ccbm/geometry/polygon.hpp"

namespace ccbm::geometry {

enum class CurveKind {
  circle,
  ellipse,
  square,
  l_shape,
  peanut_c1,
  bean_c2,
  kite_c3,
  star_c4,
  polyline,
};

/// Throws ConfigurationError for unknown names.
CurveKind curve_kind_from_string(std::string_view name);
std::string to_string(CurveKind kind);

/// A closed obstacle boundary.
///
/// Parameter layout per kind:
///   circle               cx cy r
///   ellipse              cx cy a b
///   square               cx cy half_side
///   l_shape              cx cy half_side   (square with its upper-right quadrant removed)
///   peanut_c1 .. star_c4 [cx cy scale]     (catalog curve translated and scaled; defaults 0 0 1)
///   polyline             x0 y0 x1 y1 ...
struct BoundaryCurve {
  CurveKind kind = CurveKind::circle;
  std::vector<double> parameters;
  int sample_count = 256;

  static BoundaryCurve circle(double cx, double cy, double r);
  static BoundaryCurve ellipse(double cx, double cy, double a, double b);
  static BoundaryCurve square(double cx, double cy, double half_side);
  static BoundaryCurve l_shape(double cx, double cy, double half_side);
  static BoundaryCurve catalog(CurveKind kind, double cx = 0.0, double cy = 0.0, double scale = 1.0);
  static BoundaryCurve from_polyline(const Polyline& points);
};

/// "kind p1 p2 ..." with the parameter layout above. Throws ConfigurationError
/// for unknown kinds, non-numeric tokens or wrong parameter counts.
BoundaryCurve parse_curve(std::string_view text);
/// Inverse of parse_curve (round-trip exact).
std::string to_string(const BoundaryCurve& curve);

/// Point at parameter t (period 2π). Piecewise-linear kinds are parametrized
/// proportionally to arclength, starting at their first corner.
Point evaluate_curve(const BoundaryCurve& curve, double t);

/// n points at t = 2πk/n, counterclockwise.
Polyline sample_curve(const BoundaryCurve& curve, int n);

/// Corners that a boundary discretization must keep (empty for smooth kinds).
Polyline curve_corners(const BoundaryCurve& curve);

/// n points approximately equidistributed in arclength, counterclockwise.
/// Corners of piecewise-linear kinds are always included, so the count may
/// differ from n by at most one.
Polyline resample_by_arclength(const BoundaryCurve& curve, int n);

/// Resamples a closed polyline to n points evenly spaced in arclength.
Polyline resample_polyline(std::span<const Point> loop, int n);

}  // namespace ccbm::geometry
