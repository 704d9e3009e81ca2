#pragma once

// Incremental Delaunay triangulation with constraint recovery by edge flips.
// Predicates run exactly on coordinates snapped to a 2^-26 integer grid.

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "ccbm/geometry/polygon.hpp"

namespace ccbm::geometry::detail {

class Triangulation {
 public:
  /// Builds the Delaunay triangulation of points, which must lie in [-4, 4]^2.
  /// Points that snap onto an earlier point are skipped; see was_inserted().
  explicit Triangulation(std::span<const Point> points);

  [[nodiscard]] bool was_inserted(int point) const { return inserted_[static_cast<std::size_t>(point)] != 0; }

  /// Forces segment (a, b) into the triangulation. Throws MeshError if a
  /// vertex lies on the open segment.
  void insert_constraint(int a, int b);

  /// Lawson flips on every edge that is not a constraint.
  void restore_delaunay();

  /// Triangles made only of input points (super-triangle removed), CCW.
  [[nodiscard]] std::vector<std::array<int, 3>> triangles() const;

 private:
  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> n{-1, -1, -1};  // neighbour opposite v[i]
    bool alive = true;
  };

  using IPoint = std::array<std::int64_t, 2>;

  int orient(int a, int b, int c) const;
  int in_circle(int a, int b, int c, int d) const;  // >0 when d is inside circle(a,b,c)

  bool insert_point(int p);
  int locate(int p, int start) const;
  int new_tri(const std::array<int, 3>& v);
  void kill_tri(int t);
  void flip(int t, int i);
  int index_in(int t, int vertex) const;
  int neighbour_index(int t, int other) const;
  // Triangle t and local index i such that the edge opposite v[i] is {a, b}; t = -1 if absent.
  std::pair<int, int> find_edge(int a, int b) const;
  std::vector<int> incident(int vertex) const;
  bool crosses(int a, int b, int c, int d) const;
  // p is collinear with a->b and ahead of a (p != b).
  bool on_open_ray(int a, int b, int p) const;

  std::vector<IPoint> ip_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vtri_;
  std::vector<char> inserted_;
  std::set<std::pair<int, int>> constrained_;
  int n_input_ = 0;
  int last_ = 0;
};

}  // namespace ccbm::geometry::detail
