#include "ccbm/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "ccbm/errors.hpp"

namespace ccbm::geometry {

double triangle_signed_area(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Point& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
  const Point& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double min_triangle_area(const TriangleMesh& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.num_triangles(); ++t) m = std::min(m, triangle_signed_area(mesh, t));
  return m;
}

double median_triangle_area(const TriangleMesh& mesh) {
  std::vector<double> areas(mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) areas[static_cast<std::size_t>(t)] = triangle_signed_area(mesh, t);
  if (areas.empty()) return 0.0;
  auto mid = areas.begin() + static_cast<std::ptrdiff_t>(areas.size() / 2);
  std::nth_element(areas.begin(), mid, areas.end());
  return *mid;
}

double min_angle_degrees(const TriangleMesh& mesh) {
  double m = 180.0;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point& p = mesh.vertices[static_cast<std::size_t>(tri[k])];
      const Point u = mesh.vertices[static_cast<std::size_t>(tri[(k + 1) % 3])] - p;
      const Point v = mesh.vertices[static_cast<std::size_t>(tri[(k + 2) % 3])] - p;
      const double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
      m = std::min(m, std::acos(c) * 180.0 / std::numbers::pi);
    }
  }
  return m;
}

Point outward_normal(const TriangleMesh& mesh, const BoundaryEdge& e) {
  const Point d = mesh.vertices[static_cast<std::size_t>(e.b)] - mesh.vertices[static_cast<std::size_t>(e.a)];
  return Point(d.y(), -d.x()).normalized();
}

std::vector<std::vector<int>> boundary_loops(const TriangleMesh& mesh, BoundaryTag tag) {
  std::map<int, std::map<int, int>> next_by_loop;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == tag) next_by_loop[e.loop][e.a] = e.b;
  }
  std::vector<std::vector<int>> loops;
  for (const auto& [id, next] : next_by_loop) {
    if (static_cast<int>(loops.size()) <= id) loops.resize(static_cast<std::size_t>(id) + 1);
    std::vector<int>& loop = loops[static_cast<std::size_t>(id)];
    const int start = next.begin()->first;
    int v = start;
    do {
      loop.push_back(v);
      const auto it = next.find(v);
      if (it == next.end()) throw MeshError("boundary loop " + std::to_string(id) + " is not closed");
      v = it->second;
      if (loop.size() > next.size()) throw MeshError("boundary loop " + std::to_string(id) + " is not a single cycle");
    } while (v != start);
    if (loop.size() != next.size()) throw MeshError("boundary loop " + std::to_string(id) + " is not a single cycle");
  }
  return loops;
}

std::vector<Polyline> obstacle_polylines(const TriangleMesh& mesh) {
  std::vector<Polyline> out;
  for (const auto& loop : boundary_loops(mesh, BoundaryTag::gamma)) {
    Polyline p;
    for (auto it = loop.rbegin(); it != loop.rend(); ++it) p.push_back(mesh.vertices[static_cast<std::size_t>(*it)]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<char> boundary_vertex_mask(const TriangleMesh& mesh, BoundaryTag tag) {
  std::vector<char> mask(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    mask[static_cast<std::size_t>(e.a)] = 1;
    mask[static_cast<std::size_t>(e.b)] = 1;
  }
  return mask;
}

int count_boundary_vertices(const TriangleMesh& mesh, BoundaryTag tag) {
  const auto mask = boundary_vertex_mask(mesh, tag);
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

void validate_mesh(const TriangleMesh& mesh, double sigma_radius_tol) {
  const int nv = mesh.num_vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[static_cast<std::size_t>(t)]) {
      if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(t) + " has an invalid vertex index");
    }
    if (!(triangle_signed_area(mesh, t) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
  }
  // Each boundary edge must belong to exactly one triangle, as (a, b) in its orientation.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) directed[{tri[k], tri[(k + 1) % 3]}] += 1;
  }
  for (const auto& e : mesh.boundary_edges) {
    const auto fwd = directed.find({e.a, e.b});
    const bool has_fwd = fwd != directed.end() && fwd->second == 1;
    const bool has_back = directed.count({e.b, e.a}) > 0;
    if (!has_fwd || has_back) {
      throw MeshError("boundary edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                      ") does not belong to exactly one triangle with the domain on its left");
    }
  }
  // Every directed edge without a twin must be a boundary edge.
  std::size_t unmatched = 0;
  for (const auto& [key, count] : directed) {
    if (directed.count({key.second, key.first}) == 0) ++unmatched;
    if (count > 1) throw MeshError("non-manifold edge in triangulation");
  }
  if (unmatched != mesh.boundary_edges.size()) throw MeshError("boundary edge list does not match the triangulation");

  const auto sigma = boundary_loops(mesh, BoundaryTag::sigma);
  const auto gamma = boundary_loops(mesh, BoundaryTag::gamma);
  if (sigma.size() != 1) throw MeshError("expected exactly one outer boundary loop");
  if (gamma.empty()) throw MeshError("expected at least one obstacle loop");
  for (int v : sigma.front()) {
    if (std::abs(mesh.vertices[static_cast<std::size_t>(v)].norm() - 1.0) > sigma_radius_tol) {
      throw MeshError("outer boundary vertex " + std::to_string(v) + " is off the unit circle");
    }
  }
}

double default_area_floor(const TriangleMesh& mesh) { return 1e-3 * median_triangle_area(mesh); }

std::optional<TriangleMesh> deform_mesh(const TriangleMesh& mesh, const DeformationField& field, double t,
                                        double area_floor) {
  if (field.values.size() != mesh.vertices.size()) throw ArgumentError("deformation field size does not match mesh");
  if (t < 0.0) throw ArgumentError("deformation step must be non-negative");
  const auto sigma = boundary_vertex_mask(mesh, BoundaryTag::sigma);
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    if (sigma[v] && (field.values[v].x() != 0.0 || field.values[v].y() != 0.0)) {
      throw ArgumentError("deformation field must vanish on the outer boundary");
    }
  }
  TriangleMesh out = mesh;
  for (std::size_t v = 0; v < out.vertices.size(); ++v) out.vertices[v] += t * field.values[v];
  if (t == 0.0) return out;
  for (int k = 0; k < out.num_triangles(); ++k) {
    if (triangle_signed_area(out, k) <= area_floor) return std::nullopt;
  }
  const auto loops = obstacle_polylines(out);
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (!is_simple_loop(loops[i])) return std::nullopt;
    for (std::size_t j = i + 1; j < loops.size(); ++j) {
      if (loops_intersect(loops[i], loops[j])) return std::nullopt;
    }
  }
  return out;
}

}  // namespace ccbm::geometry
