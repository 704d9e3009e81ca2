#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ccbm/geometry/curve.hpp"
#include "ccbm/geometry/mesh.hpp"

namespace ccbm::geometry {

/// Minimum distance between an obstacle and the outer unit circle.
inline constexpr double kClearance = 0.05;
/// Minimum triangle angle (degrees) a generated mesh must reach.
inline constexpr double kQualityFloorDegrees = 15.0;

struct MeshOptions {
  int sigma_nodes = 100;
  /// Nodes per obstacle loop.
  int gamma_nodes = 70;
  /// Upper bound on the interior edge length; <= 0 selects the outer boundary spacing.
  double h_target = 0.0;
  /// Angle of the first outer boundary node.
  double sigma_phase = 0.0;
  /// Growth rate of the element size away from a boundary loop.
  double grading = 0.3;
  int smoothing_iterations = 40;
};

/// Checks obstacle admissibility (inside the disk with clearance, simple,
/// pairwise disjoint). Throws GeometryError.
void check_admissible(std::span<const Polyline> obstacles, double clearance = kClearance);

/// Triangulates the unit disk minus the obstacles. The outer loop gets exactly
/// sigma_nodes equally spaced vertices on the unit circle; each obstacle loop
/// gets gamma_nodes vertices (±1 when corners are kept).
TriangleMesh generate_annulus_mesh(std::span<const BoundaryCurve> obstacles, const MeshOptions& options);

/// Same, from obstacle polylines used verbatim as boundary vertices.
TriangleMesh mesh_from_boundaries(std::span<const Point> sigma_loop, std::span<const Polyline> obstacle_loops,
                                  double h_target, const MeshOptions& options = {});

/// New triangulation of the same boundary polylines. Boundary vertex
/// coordinates are preserved exactly. Throws MeshError for invalid boundaries.
TriangleMesh remesh(const TriangleMesh& mesh);

/// Splits every triangle into four. New boundary vertices are moved by snap
/// (given the midpoint and its boundary tag and loop id).
using BoundarySnap = std::function<Point(const Point&, BoundaryTag, int)>;
TriangleMesh refine_uniform(const TriangleMesh& mesh, const BoundarySnap& snap);

}  // namespace ccbm::geometry
