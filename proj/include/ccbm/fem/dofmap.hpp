#pragma once

#include <array>
#include <vector>

#include "ccbm/geometry/mesh.hpp"

namespace ccbm::fem {

using geometry::BoundaryTag;
using geometry::Point;
using geometry::TriangleMesh;

/// A boundary edge as seen by the P2 space: its nodes, its triangle and the
/// local vertex slots of a and b there.
struct BoundaryEdgeDofs {
  int a = 0, mid = 0, b = 0;
  BoundaryTag tag = BoundaryTag::sigma;
  int loop = 0;
  int triangle = 0;
  int local_a = 0, local_b = 0;
};

/// Taylor-Hood numbering. P2 nodes are the mesh vertices followed by one node
/// per edge. Velocity dof = 2*node + component; pressure dofs follow all
/// velocity dofs, one per vertex.
struct DofMap {
  int num_vertices = 0;
  int num_triangles = 0;
  int num_nodes = 0;
  std::vector<std::array<int, 6>> cell_nodes;
  std::vector<Point> node_coords;
  std::vector<BoundaryEdgeDofs> boundary;
  std::vector<int> sigma_nodes;
  std::vector<int> gamma_nodes;
  /// Per dof: 1 if fixed to zero (velocity on the obstacle).
  std::vector<char> constrained;

  [[nodiscard]] int num_velocity_dofs() const { return 2 * num_nodes; }
  [[nodiscard]] int num_pressure_dofs() const { return num_vertices; }
  [[nodiscard]] int num_dofs() const { return num_velocity_dofs() + num_pressure_dofs(); }
  [[nodiscard]] static int velocity_dof(int node, int comp) { return 2 * node + comp; }
  [[nodiscard]] int pressure_dof(int vertex) const { return 2 * num_nodes + vertex; }

  /// Throws ArgumentError when the mesh does not match the numbering.
  void check_mesh(const TriangleMesh& mesh) const;
};

DofMap build_dofmap(const TriangleMesh& mesh);

}  // namespace ccbm::fem
