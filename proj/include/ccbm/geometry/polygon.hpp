#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace ccbm::geometry {

using Point = Eigen::Vector2d;
/// Closed polyline; the closing segment back to the first point is implicit.
using Polyline = std::vector<Point>;

/// Shoelace area, positive for counterclockwise loops.
double signed_area(std::span<const Point> loop);

double distance_to_segment(const Point& p, const Point& a, const Point& b);

/// Distance from p to the closed polyline.
double distance_to_loop(const Point& p, std::span<const Point> loop);

bool point_in_polygon(const Point& p, std::span<const Point> loop);

/// True when segments [a,b] and [c,d] share at least one point.
bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d);

/// Checks that no two non-adjacent edges of the closed loop touch.
bool is_simple_loop(std::span<const Point> loop);

/// True when two closed loops have intersecting edges.
bool loops_intersect(std::span<const Point> a, std::span<const Point> b);

/// Counterclockwise convex hull (Andrew's monotone chain).
Polyline convex_hull(std::span<const Point> points);

/// Area of the convex hull divided by the enclosed area; 1 for convex loops.
double convex_hull_area_ratio(std::span<const Point> loop);

double perimeter(std::span<const Point> loop);

}  // namespace ccbm::geometry
