#include "ccbm/geometry/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>

#include "ccbm/errors.hpp"
#include "triangulation.hpp"

namespace ccbm::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform-grid bucket index over the segments of one closed loop.
class LoopIndex {
 public:
  explicit LoopIndex(std::span<const Point> loop) : loop_(loop.begin(), loop.end()) {
    lo_ = hi_ = loop_.front();
    for (const Point& p : loop_) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const int n = static_cast<int>(loop_.size());
    cells_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n))), 1, 64);
    const Point ext = (hi_ - lo_).cwiseMax(Point(1e-9, 1e-9));
    cell_ = std::max(ext.x(), ext.y()) / cells_;
    nx_ = static_cast<int>(std::ceil(ext.x() / cell_)) + 1;
    ny_ = static_cast<int>(std::ceil(ext.y() / cell_)) + 1;
    buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    rows_.assign(static_cast<std::size_t>(ny_), {});
    for (int i = 0; i < n; ++i) {
      const Point& a = loop_[static_cast<std::size_t>(i)];
      const Point& b = loop_[static_cast<std::size_t>((i + 1) % n)];
      const auto [x0, y0] = cell_of(a.cwiseMin(b));
      const auto [x1, y1] = cell_of(a.cwiseMax(b));
      for (int x = x0; x <= x1; ++x) {
        for (int y = y0; y <= y1; ++y) buckets_[static_cast<std::size_t>(x * ny_ + y)].push_back(i);
      }
      for (int y = y0; y <= y1; ++y) rows_[static_cast<std::size_t>(y)].push_back(i);
    }
  }

  /// Even-odd ray cast restricted to the segments of one horizontal band.
  bool contains(const Point& p) const {
    if (p.x() < lo_.x() || p.x() > hi_.x() || p.y() < lo_.y() || p.y() > hi_.y()) return false;
    const int n = static_cast<int>(loop_.size());
    bool in = false;
    for (int i : rows_[static_cast<std::size_t>(cell_of(p).second)]) {
      const Point& a = loop_[static_cast<std::size_t>(i)];
      const Point& b = loop_[static_cast<std::size_t>((i + 1) % n)];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (p.x() < x) in = !in;
      }
    }
    return in;
  }

  /// Distance to the loop and the closest point on it. Distances beyond cutoff
  /// may be reported as infinity.
  std::pair<double, Point> nearest(const Point& p,
                                   double cutoff = std::numeric_limits<double>::infinity()) const {
    const auto [cx, cy] = cell_of(p);
    double best = std::numeric_limits<double>::infinity();
    Point best_point = loop_.front();
    const int n = static_cast<int>(loop_.size());
    const double outside = std::max({lo_.x() - p.x(), p.x() - hi_.x(), lo_.y() - p.y(), p.y() - hi_.y(), 0.0});
    for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
      // Every segment in rings beyond this one is at least this far away.
      const double bound = outside + (ring - 1) * cell_;
      if (ring > 0 && bound > std::min(best, cutoff)) break;
      for (int x = cx - ring; x <= cx + ring; ++x) {
        for (int y = cy - ring; y <= cy + ring; ++y) {
          if (std::max(std::abs(x - cx), std::abs(y - cy)) != ring) continue;
          if (x < 0 || y < 0 || x >= nx_ || y >= ny_) continue;
          for (int i : buckets_[static_cast<std::size_t>(x * ny_ + y)]) {
            const Point& a = loop_[static_cast<std::size_t>(i)];
            const Point& b = loop_[static_cast<std::size_t>((i + 1) % n)];
            const Point ab = b - a;
            const double s = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
            const Point q = a + s * ab;
            const double d = (p - q).norm();
            if (d < best) {
              best = d;
              best_point = q;
            }
          }
        }
      }
    }
    return {best, best_point};
  }

 private:
  std::pair<int, int> cell_of(const Point& p) const {
    const int x = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)), 0, nx_ - 1);
    const int y = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / cell_)), 0, ny_ - 1);
    return {x, y};
  }

  Polyline loop_;
  Point lo_, hi_;
  double cell_ = 1.0;
  int cells_ = 1, nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
  std::vector<std::vector<int>> rows_;
};

struct Domain {
  Polyline sigma;              // counterclockwise
  std::vector<Polyline> holes;  // counterclockwise
  std::vector<LoopIndex> index;  // sigma first, then holes
  std::vector<double> spacing;   // mean edge length per loop
  double h_max = 0.0;
  double grading = 0.3;

  Domain(std::span<const Point> s, std::span<const Polyline> h, double hmax, double g)
      : sigma(s.begin(), s.end()), holes(h.begin(), h.end()), h_max(hmax), grading(g) {
    index.emplace_back(sigma);
    spacing.push_back(perimeter(sigma) / static_cast<double>(sigma.size()));
    for (const Polyline& hole : holes) {
      index.emplace_back(hole);
      spacing.push_back(perimeter(hole) / static_cast<double>(hole.size()));
    }
  }

  bool inside(const Point& p) const {
    if (!index.front().contains(p)) return false;
    return std::none_of(index.begin() + 1, index.end(), [&](const LoopIndex& h) { return h.contains(p); });
  }

  double size(const Point& p) const {
    double h = h_max;
    for (std::size_t l = 0; l < index.size(); ++l) {
      if (spacing[l] >= h) continue;
      h = std::min(h, spacing[l] + grading * index[l].nearest(p, (h - spacing[l]) / grading).first);
    }
    return h;
  }

  std::pair<double, Point> nearest(const Point& p, double cutoff = std::numeric_limits<double>::infinity()) const {
    std::pair<double, Point> best{std::numeric_limits<double>::infinity(), p};
    for (const LoopIndex& li : index) {
      const auto r = li.nearest(p, std::min(cutoff, best.first));
      if (r.first < best.first) best = r;
    }
    return best;
  }
};

std::uint64_t edge_id(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

std::vector<std::array<int, 3>> domain_triangles(const std::vector<std::array<int, 3>>& tris,
                                                 const std::vector<Point>& pts, const Domain& dom) {
  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    const Point c = (pts[static_cast<std::size_t>(t[0])] + pts[static_cast<std::size_t>(t[1])] +
                     pts[static_cast<std::size_t>(t[2])]) /
                    3.0;
    if (dom.inside(c)) out.push_back(t);
  }
  return out;
}

std::vector<Point> seed_interior(const Domain& dom) {
  const double h_min = *std::min_element(dom.spacing.begin(), dom.spacing.end());
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> out;
  const double dy = h_min * std::sqrt(3.0) / 2.0;
  int row = 0;
  for (double y = -1.0; y <= 1.0; y += dy, ++row) {
    const double shift = (row % 2) ? 0.5 * h_min : 0.0;
    for (double x = -1.0 + shift; x <= 1.0; x += h_min) {
      const Point p(x, y);
      const double keep = unif(rng);
      if (x * x + y * y >= 1.0) continue;
      if (!dom.inside(p)) continue;
      const double h = dom.size(p);
      if (dom.nearest(p, 0.5 * h).first < 0.5 * h) continue;
      if (keep > (h_min / h) * (h_min / h)) continue;
      out.push_back(p);
    }
  }
  return out;
}

// Force-based smoothing of the interior points (boundary points stay fixed).
void relax(std::vector<Point>& pts, std::size_t n_fixed, const Domain& dom, int iterations) {
  constexpr double kFscale = 1.2;
  constexpr double kDt = 0.2;
  const double h_min = *std::min_element(dom.spacing.begin(), dom.spacing.end());
  std::vector<Point> force(pts.size());
  for (int it = 0; it < iterations; ++it) {
    detail::Triangulation tri(pts);
    const auto tris = domain_triangles(tri.triangles(), pts, dom);
    std::vector<std::pair<int, int>> edges;
    std::unordered_map<std::uint64_t, char> seen;
    seen.reserve(tris.size() * 3);
    for (const auto& t : tris) {
      for (int k = 0; k < 3; ++k) {
        const int a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
        if (seen.emplace(edge_id(a, b), 1).second) edges.emplace_back(a, b);
      }
    }
    std::vector<double> len(edges.size()), hm(edges.size());
    double sum_l2 = 0.0, sum_h2 = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Point& a = pts[static_cast<std::size_t>(edges[e].first)];
      const Point& b = pts[static_cast<std::size_t>(edges[e].second)];
      len[e] = (a - b).norm();
      hm[e] = dom.size(0.5 * (a + b));
      sum_l2 += len[e] * len[e];
      sum_h2 += hm[e] * hm[e];
    }
    const double scale = kFscale * std::sqrt(sum_l2 / sum_h2);
    std::fill(force.begin(), force.end(), Point::Zero());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double f = std::max(hm[e] * scale - len[e], 0.0);
      if (f == 0.0 || len[e] == 0.0) continue;
      const auto [a, b] = edges[e];
      const Point dir = (pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(b)]) / len[e];
      force[static_cast<std::size_t>(a)] += f * dir;
      force[static_cast<std::size_t>(b)] -= f * dir;
    }
    double max_move = 0.0;
    for (std::size_t i = n_fixed; i < pts.size(); ++i) {
      const Point old = pts[i];
      Point p = old + kDt * force[i];
      const double h = dom.size(p);
      const bool in = dom.inside(p);
      const auto [d, c] = dom.nearest(p, in ? 0.3 * h : std::numeric_limits<double>::infinity());
      if (!in || d < 0.3 * h) {
        const Point away = p - c;
        if (away.norm() < 1e-14) {
          p = old;
        } else {
          p = c + (in ? 1.0 : -1.0) * away.normalized() * (0.3 * h);
          if (!dom.inside(p)) p = old;
        }
      }
      pts[i] = p;
      max_move = std::max(max_move, (p - old).norm());
    }
    if (max_move < 1e-3 * h_min) break;
  }
}

struct Triangulated {
  std::vector<Point> points;
  std::vector<std::array<int, 3>> triangles;
};

Triangulated constrained_triangulation(std::vector<Point> pts, const Domain& dom,
                                       const std::vector<std::vector<int>>& loops) {
  detail::Triangulation tri(pts);
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (!tri.was_inserted(loop[i])) throw MeshError("boundary vertices coincide");
    }
  }
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) tri.insert_constraint(loop[i], loop[(i + 1) % loop.size()]);
  }
  tri.restore_delaunay();
  // Interior points that collapsed onto another point were skipped; drop them.
  std::vector<int> remap(pts.size(), -1);
  std::vector<Point> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (tri.was_inserted(static_cast<int>(i))) {
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(pts[i]);
    }
  }
  Triangulated out;
  for (auto t : domain_triangles(tri.triangles(), pts, dom)) {
    for (int& v : t) v = remap[static_cast<std::size_t>(v)];
    out.triangles.push_back(t);
  }
  out.points = std::move(kept);
  return out;
}

// Moves each interior vertex towards the centroid of its neighbours when that keeps
// all incident triangles valid.
void laplacian_pass(Triangulated& m, std::size_t n_fixed) {
  std::vector<Point> sum(m.points.size(), Point::Zero());
  std::vector<int> count(m.points.size(), 0);
  std::vector<std::vector<int>> incident(m.points.size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = m.triangles[t][static_cast<std::size_t>(k)];
      const int b = m.triangles[t][static_cast<std::size_t>((k + 1) % 3)];
      sum[static_cast<std::size_t>(a)] += m.points[static_cast<std::size_t>(b)];
      count[static_cast<std::size_t>(a)] += 1;
      incident[static_cast<std::size_t>(a)].push_back(static_cast<int>(t));
    }
  }
  auto area = [&](int t) {
    const auto& tr = m.triangles[static_cast<std::size_t>(t)];
    const Point& a = m.points[static_cast<std::size_t>(tr[0])];
    const Point& b = m.points[static_cast<std::size_t>(tr[1])];
    const Point& c = m.points[static_cast<std::size_t>(tr[2])];
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  };
  for (std::size_t v = n_fixed; v < m.points.size(); ++v) {
    if (count[v] == 0) continue;
    const Point old = m.points[v];
    m.points[v] = sum[v] / count[v];
    for (int t : incident[v]) {
      if (area(t) <= 0.0) {
        m.points[v] = old;
        break;
      }
    }
  }
}

double min_angle(const Triangulated& m) {
  TriangleMesh tmp;
  tmp.vertices = m.points;
  tmp.triangles = m.triangles;
  return min_angle_degrees(tmp);
}

TriangleMesh build(std::span<const Point> sigma_loop, std::span<const Polyline> obstacle_loops, double h_target,
                   const MeshOptions& options, bool enforce_quality) {
  if (sigma_loop.size() < 3) throw MeshError("outer boundary needs at least 3 vertices");
  if (obstacle_loops.empty()) throw MeshError("at least one obstacle loop is required");
  if (!is_simple_loop(sigma_loop)) throw MeshError("outer boundary is not a simple loop");
  for (std::size_t i = 0; i < obstacle_loops.size(); ++i) {
    if (obstacle_loops[i].size() < 3 || !is_simple_loop(obstacle_loops[i])) {
      throw MeshError("obstacle loop " + std::to_string(i) + " is not a simple loop");
    }
    if (loops_intersect(obstacle_loops[i], sigma_loop)) throw MeshError("obstacle loop crosses the outer boundary");
    for (std::size_t j = i + 1; j < obstacle_loops.size(); ++j) {
      if (loops_intersect(obstacle_loops[i], obstacle_loops[j])) throw MeshError("obstacle loops intersect");
    }
  }
  std::vector<Polyline> holes;
  for (const Polyline& loop : obstacle_loops) {
    Polyline h = loop;
    if (signed_area(h) < 0.0) std::reverse(h.begin(), h.end());
    holes.push_back(std::move(h));
  }
  Polyline sigma(sigma_loop.begin(), sigma_loop.end());
  if (signed_area(sigma) < 0.0) throw MeshError("outer boundary must be counterclockwise");

  const double h_sigma = perimeter(sigma) / static_cast<double>(sigma.size());
  const double h_max = h_target > 0.0 ? h_target : h_sigma;
  const Domain dom(sigma, holes, h_max, options.grading);

  std::vector<Point> pts(sigma.begin(), sigma.end());
  std::vector<std::vector<int>> loops;
  {
    std::vector<int> l(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) l[i] = static_cast<int>(i);
    loops.push_back(std::move(l));
  }
  for (const Polyline& h : holes) {
    std::vector<int> l;
    for (const Point& p : h) {
      l.push_back(static_cast<int>(pts.size()));
      pts.push_back(p);
    }
    loops.push_back(std::move(l));
  }
  const std::size_t n_fixed = pts.size();
  const auto interior = seed_interior(dom);
  pts.insert(pts.end(), interior.begin(), interior.end());
  relax(pts, n_fixed, dom, options.smoothing_iterations);

  Triangulated tri = constrained_triangulation(pts, dom, loops);
  for (int pass = 0; pass < 6 && min_angle(tri) < 25.0; ++pass) {
    laplacian_pass(tri, n_fixed);
    tri = constrained_triangulation(tri.points, dom, loops);
  }
  if (enforce_quality && min_angle(tri) < kQualityFloorDegrees) {
    throw MeshError("mesh quality below " + std::to_string(kQualityFloorDegrees) + " degrees");
  }

  TriangleMesh mesh;
  mesh.vertices = std::move(tri.points);
  mesh.triangles = std::move(tri.triangles);
  mesh.h_target = h_max;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    mesh.boundary_edges.push_back({static_cast<int>(i), static_cast<int>((i + 1) % sigma.size()), BoundaryTag::sigma, 0});
  }
  for (std::size_t l = 1; l < loops.size(); ++l) {
    const auto& loop = loops[l];
    // Holes are stored counterclockwise; the domain lies to the left of the reversed edges.
    for (std::size_t i = 0; i < loop.size(); ++i) {
      mesh.boundary_edges.push_back({loop[(i + 1) % loop.size()], loop[i], BoundaryTag::gamma, static_cast<int>(l - 1)});
    }
  }
  validate_mesh(mesh, 1e-10);
  return mesh;
}

}  // namespace

void check_admissible(std::span<const Polyline> obstacles, double clearance) {
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Polyline& loop = obstacles[i];
    if (loop.size() < 3 || !is_simple_loop(loop)) {
      throw GeometryError("obstacle " + std::to_string(i) + " is not a simple closed curve");
    }
    for (const Point& p : loop) {
      if (p.norm() > 1.0 - clearance) {
        throw GeometryError("obstacle " + std::to_string(i) + " violates the clearance to the outer boundary");
      }
    }
    for (std::size_t j = i + 1; j < obstacles.size(); ++j) {
      if (loops_intersect(loop, obstacles[j]) || point_in_polygon(obstacles[j].front(), loop) ||
          point_in_polygon(loop.front(), obstacles[j])) {
        throw GeometryError("obstacles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      }
    }
  }
}

TriangleMesh generate_annulus_mesh(std::span<const BoundaryCurve> obstacles, const MeshOptions& options) {
  if (obstacles.empty()) throw GeometryError("at least one obstacle is required");
  if (options.sigma_nodes < 8 || options.gamma_nodes < 8) throw ArgumentError("boundary node counts must be >= 8");
  std::vector<Polyline> dense;
  for (const BoundaryCurve& c : obstacles) dense.push_back(sample_curve(c, std::max(c.sample_count, 512)));
  check_admissible(dense);

  Polyline sigma;
  for (int k = 0; k < options.sigma_nodes; ++k) {
    const double t = options.sigma_phase + kTwoPi * k / options.sigma_nodes;
    sigma.emplace_back(std::cos(t), std::sin(t));
  }
  std::vector<Polyline> loops;
  for (const BoundaryCurve& c : obstacles) loops.push_back(resample_by_arclength(c, options.gamma_nodes));
  check_admissible(loops);
  return build(sigma, loops, options.h_target, options, false);
}

TriangleMesh mesh_from_boundaries(std::span<const Point> sigma_loop, std::span<const Polyline> obstacle_loops,
                                  double h_target, const MeshOptions& options) {
  return build(sigma_loop, obstacle_loops, h_target, options, false);
}

TriangleMesh remesh(const TriangleMesh& mesh) {
  const auto sigma_loops = boundary_loops(mesh, BoundaryTag::sigma);
  if (sigma_loops.size() != 1) throw MeshError("remesh needs exactly one outer loop");
  Polyline sigma;
  for (int v : sigma_loops.front()) sigma.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
  const auto holes = obstacle_polylines(mesh);
  MeshOptions opts;
  return build(sigma, holes, mesh.h_target, opts, true);
}

TriangleMesh refine_uniform(const TriangleMesh& mesh, const BoundarySnap& snap) {
  TriangleMesh out;
  out.vertices = mesh.vertices;
  out.h_target = 0.5 * mesh.h_target;
  std::unordered_map<std::uint64_t, int> mid;
  std::map<std::uint64_t, const BoundaryEdge*> boundary;
  for (const auto& e : mesh.boundary_edges) boundary[edge_id(e.a, e.b)] = &e;
  auto midpoint = [&](int a, int b) {
    const auto key = edge_id(a, b);
    const auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    Point p = 0.5 * (mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)]);
    const auto bit = boundary.find(key);
    if (bit != boundary.end() && snap) p = snap(p, bit->second->tag, bit->second->loop);
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    mid.emplace(key, id);
    return id;
  };
  for (const auto& t : mesh.triangles) {
    const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = mid.at(edge_id(e.a, e.b));
    out.boundary_edges.push_back({e.a, m, e.tag, e.loop});
    out.boundary_edges.push_back({m, e.b, e.tag, e.loop});
  }
  return out;
}

}  // namespace ccbm::geometry
