#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ccbm/geometry/polygon.hpp"

namespace ccbm::geometry {

enum class BoundaryTag : int { sigma = 0, gamma = 1 };

/// Boundary edge oriented so that the flow domain lies to its left. The outer
/// loop therefore runs counterclockwise and obstacle loops run clockwise, and
/// the outward unit normal of the domain is the right normal of (a -> b).
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::sigma;
  int loop = 0;
};

struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  double h_target = 0.0;

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles.size()); }
};

/// One 2D vector per mesh vertex; must vanish on the outer boundary.
struct DeformationField {
  std::vector<Point> values;
};

double triangle_signed_area(const TriangleMesh& mesh, int t);
double min_triangle_area(const TriangleMesh& mesh);
double median_triangle_area(const TriangleMesh& mesh);
/// Smallest interior angle over all triangles, in degrees.
double min_angle_degrees(const TriangleMesh& mesh);

/// Outward unit normal of the domain on a boundary edge.
Point outward_normal(const TriangleMesh& mesh, const BoundaryEdge& e);

/// Vertex loops following the boundary edge orientation, one per loop id.
std::vector<std::vector<int>> boundary_loops(const TriangleMesh& mesh, BoundaryTag tag);

/// Obstacle boundaries as counterclockwise polylines.
std::vector<Polyline> obstacle_polylines(const TriangleMesh& mesh);

/// Flags of vertices lying on the given boundary.
std::vector<char> boundary_vertex_mask(const TriangleMesh& mesh, BoundaryTag tag);

int count_boundary_vertices(const TriangleMesh& mesh, BoundaryTag tag);

/// Throws MeshError naming the first violated structural invariant.
void validate_mesh(const TriangleMesh& mesh, double sigma_radius_tol = 1e-10);

/// x -> x + t V(x). Returns nullopt (step too large) when a triangle area
/// drops to area_floor or below, or an obstacle loop stops being simple or
/// touches another boundary loop. Throws ArgumentError if V is nonzero on the
/// outer boundary or has the wrong size.
std::optional<TriangleMesh> deform_mesh(const TriangleMesh& mesh, const DeformationField& field, double t,
                                        double area_floor);

/// Default inversion guard: 1e-3 times the median triangle area.
double default_area_floor(const TriangleMesh& mesh);

}  // namespace ccbm::geometry
