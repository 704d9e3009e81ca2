#include "triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "ccbm/errors.hpp"

namespace ccbm::geometry::detail {

namespace {

constexpr double kScale = 67108864.0;  // 2^26
using i128 = __int128;

int sgn(i128 v) { return (v > 0) - (v < 0); }

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

Triangulation::Triangulation(std::span<const Point> points) : n_input_(static_cast<int>(points.size())) {
  ip_.reserve(points.size() + 3);
  for (const Point& p : points) {
    if (std::abs(p.x()) > 4.0 || std::abs(p.y()) > 4.0) throw MeshError("triangulation point out of range");
    ip_.push_back({std::llround(p.x() * kScale), std::llround(p.y() * kScale)});
  }
  // Super triangle.
  ip_.push_back({std::llround(-7.5 * kScale), std::llround(-6.0 * kScale)});
  ip_.push_back({std::llround(7.5 * kScale), std::llround(-6.0 * kScale)});
  ip_.push_back({0, std::llround(7.5 * kScale)});
  vtri_.assign(ip_.size(), -1);
  inserted_.assign(points.size(), 0);
  last_ = new_tri({n_input_, n_input_ + 1, n_input_ + 2});

  // Insert along a serpentine over coarse grid rows so the walk stays short.
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  const double cell = std::max(2.0 / std::sqrt(static_cast<double>(points.size()) + 1.0), 1e-3);
  auto row = [&](int i) { return static_cast<long>(std::floor((points[static_cast<std::size_t>(i)].y() + 4.0) / cell)); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const long ra = row(a), rb = row(b);
    if (ra != rb) return ra < rb;
    const double xa = points[static_cast<std::size_t>(a)].x(), xb = points[static_cast<std::size_t>(b)].x();
    return (ra % 2 == 0) ? xa < xb : xa > xb;
  });
  for (int p : order) inserted_[static_cast<std::size_t>(p)] = insert_point(p) ? 1 : 0;
}

int Triangulation::orient(int a, int b, int c) const {
  const auto& pa = ip_[static_cast<std::size_t>(a)];
  const auto& pb = ip_[static_cast<std::size_t>(b)];
  const auto& pc = ip_[static_cast<std::size_t>(c)];
  const i128 d = static_cast<i128>(pb[0] - pa[0]) * (pc[1] - pa[1]) - static_cast<i128>(pb[1] - pa[1]) * (pc[0] - pa[0]);
  return sgn(d);
}

int Triangulation::in_circle(int a, int b, int c, int d) const {
  const auto& pd = ip_[static_cast<std::size_t>(d)];
  auto rel = [&](int i) {
    const auto& p = ip_[static_cast<std::size_t>(i)];
    return std::array<i128, 2>{p[0] - pd[0], p[1] - pd[1]};
  };
  const auto A = rel(a), B = rel(b), C = rel(c);
  const i128 alift = A[0] * A[0] + A[1] * A[1];
  const i128 blift = B[0] * B[0] + B[1] * B[1];
  const i128 clift = C[0] * C[0] + C[1] * C[1];
  const i128 det = alift * (B[0] * C[1] - C[0] * B[1]) + blift * (C[0] * A[1] - A[0] * C[1]) +
                   clift * (A[0] * B[1] - B[0] * A[1]);
  return sgn(det);
}

int Triangulation::new_tri(const std::array<int, 3>& v) {
  int t;
  if (!free_.empty()) {
    t = free_.back();
    free_.pop_back();
    tris_[static_cast<std::size_t>(t)] = Tri{};
  } else {
    t = static_cast<int>(tris_.size());
    tris_.emplace_back();
  }
  tris_[static_cast<std::size_t>(t)].v = v;
  for (int x : v) vtri_[static_cast<std::size_t>(x)] = t;
  return t;
}

void Triangulation::kill_tri(int t) {
  tris_[static_cast<std::size_t>(t)].alive = false;
  free_.push_back(t);
}

int Triangulation::index_in(int t, int vertex) const {
  const auto& v = tris_[static_cast<std::size_t>(t)].v;
  for (int i = 0; i < 3; ++i) {
    if (v[static_cast<std::size_t>(i)] == vertex) return i;
  }
  return -1;
}

int Triangulation::neighbour_index(int t, int other) const {
  const auto& n = tris_[static_cast<std::size_t>(t)].n;
  for (int i = 0; i < 3; ++i) {
    if (n[static_cast<std::size_t>(i)] == other) return i;
  }
  return -1;
}

int Triangulation::locate(int p, int start) const {
  int t = start;
  // Visibility walk; exact predicates make it terminate on a Delaunay triangulation.
  for (std::size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
    const Tri& tri = tris_[static_cast<std::size_t>(t)];
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = (k + static_cast<int>(steps)) % 3;
      if (orient(tri.v[static_cast<std::size_t>((i + 1) % 3)], tri.v[static_cast<std::size_t>((i + 2) % 3)], p) < 0) {
        next = tri.n[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (next < 0) return t;
    t = next;
  }
  throw MeshError("point location did not terminate");
}

bool Triangulation::insert_point(int p) {
  if (!tris_[static_cast<std::size_t>(last_)].alive) last_ = vtri_[static_cast<std::size_t>(n_input_)];
  const int t0 = locate(p, last_);
  for (int v : tris_[static_cast<std::size_t>(t0)].v) {
    if (ip_[static_cast<std::size_t>(v)] == ip_[static_cast<std::size_t>(p)]) return false;
  }

  std::vector<int> cavity{t0};
  std::vector<char> in_cavity(tris_.size(), 0);
  in_cavity[static_cast<std::size_t>(t0)] = 1;
  struct Border {
    int a, b, outside;
  };
  std::vector<Border> border;
  for (std::size_t c = 0; c < cavity.size(); ++c) {
    const Tri tri = tris_[static_cast<std::size_t>(cavity[c])];
    for (int i = 0; i < 3; ++i) {
      const int nb = tri.n[static_cast<std::size_t>(i)];
      const int a = tri.v[static_cast<std::size_t>((i + 1) % 3)];
      const int b = tri.v[static_cast<std::size_t>((i + 2) % 3)];
      if (nb >= 0 && in_cavity[static_cast<std::size_t>(nb)]) continue;
      if (nb >= 0) {
        const auto& v = tris_[static_cast<std::size_t>(nb)].v;
        if (in_circle(v[0], v[1], v[2], p) >= 0) {
          in_cavity[static_cast<std::size_t>(nb)] = 1;
          cavity.push_back(nb);
          continue;
        }
      }
      border.push_back({a, b, nb});
    }
  }
  // Cavity triangles may have been pushed before a later neighbour joined; drop such borders.
  std::erase_if(border, [&](const Border& e) { return e.outside >= 0 && in_cavity[static_cast<std::size_t>(e.outside)]; });

  std::vector<int> old_cavity = cavity;
  std::unordered_map<int, int> by_start, by_end;
  std::vector<int> created;
  created.reserve(border.size());
  for (const Border& e : border) {
    if (orient(e.a, e.b, p) <= 0) throw MeshError("degenerate cavity during point insertion");
  }
  for (int t : old_cavity) kill_tri(t);
  for (const Border& e : border) {
    const int t = new_tri({e.a, e.b, p});
    tris_[static_cast<std::size_t>(t)].n[2] = e.outside;
    if (e.outside >= 0) {
      auto& on = tris_[static_cast<std::size_t>(e.outside)];
      for (int k = 0; k < 3; ++k) {
        const int x = on.v[static_cast<std::size_t>((k + 1) % 3)];
        const int y = on.v[static_cast<std::size_t>((k + 2) % 3)];
        if (x == e.b && y == e.a) on.n[static_cast<std::size_t>(k)] = t;
      }
    }
    by_start[e.a] = t;
    by_end[e.b] = t;
    created.push_back(t);
  }
  for (int t : created) {
    auto& tri = tris_[static_cast<std::size_t>(t)];
    tri.n[0] = by_start.at(tri.v[1]);  // edge (b, p)
    tri.n[1] = by_end.at(tri.v[0]);    // edge (p, a)
  }
  last_ = created.front();
  return true;
}

void Triangulation::flip(int t, int i) {
  Tri& T = tris_[static_cast<std::size_t>(t)];
  const int u = T.n[static_cast<std::size_t>(i)];
  Tri& U = tris_[static_cast<std::size_t>(u)];
  const int a = T.v[static_cast<std::size_t>(i)];
  const int b = T.v[static_cast<std::size_t>((i + 1) % 3)];
  const int c = T.v[static_cast<std::size_t>((i + 2) % 3)];
  const int j = neighbour_index(u, t);
  const int d = U.v[static_cast<std::size_t>(j)];
  const int t_ca = T.n[static_cast<std::size_t>((i + 1) % 3)];
  const int t_ab = T.n[static_cast<std::size_t>((i + 2) % 3)];
  // U = (d, c, b): opposite c is edge (b, d), opposite b is edge (d, c).
  const int t_bd = U.n[static_cast<std::size_t>((j + 1) % 3)];
  const int t_dc = U.n[static_cast<std::size_t>((j + 2) % 3)];

  T.v = {a, b, d};
  T.n = {t_bd, u, t_ab};
  U.v = {a, d, c};
  U.n = {t_dc, t_ca, t};
  if (t_bd >= 0) tris_[static_cast<std::size_t>(t_bd)].n[static_cast<std::size_t>(neighbour_index(t_bd, u))] = t;
  if (t_ca >= 0) tris_[static_cast<std::size_t>(t_ca)].n[static_cast<std::size_t>(neighbour_index(t_ca, t))] = u;
  vtri_[static_cast<std::size_t>(a)] = t;
  vtri_[static_cast<std::size_t>(b)] = t;
  vtri_[static_cast<std::size_t>(d)] = t;
  vtri_[static_cast<std::size_t>(c)] = u;
}

std::vector<int> Triangulation::incident(int vertex) const {
  std::vector<int> out;
  const int start = vtri_[static_cast<std::size_t>(vertex)];
  if (start < 0) return out;
  // Rotate counterclockwise, then clockwise if a hull edge interrupts the fan.
  int t = start;
  do {
    out.push_back(t);
    const int k = index_in(t, vertex);
    t = tris_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>((k + 1) % 3)];
  } while (t >= 0 && t != start);
  if (t < 0) {
    t = start;
    while (true) {
      const int k = index_in(t, vertex);
      t = tris_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>((k + 2) % 3)];
      if (t < 0 || t == start) break;
      out.push_back(t);
    }
  }
  return out;
}

std::pair<int, int> Triangulation::find_edge(int a, int b) const {
  for (int t : incident(a)) {
    const int ka = index_in(t, a);
    const int kb = index_in(t, b);
    if (kb >= 0) return {t, 3 - ka - kb};
  }
  return {-1, -1};
}

bool Triangulation::on_open_ray(int a, int b, int p) const {
  if (orient(a, b, p) != 0) return false;
  const auto& pa = ip_[static_cast<std::size_t>(a)];
  const auto& pb = ip_[static_cast<std::size_t>(b)];
  const auto& pp = ip_[static_cast<std::size_t>(p)];
  const i128 dot = static_cast<i128>(pp[0] - pa[0]) * (pb[0] - pa[0]) + static_cast<i128>(pp[1] - pa[1]) * (pb[1] - pa[1]);
  return p != b && dot > 0;
}

bool Triangulation::crosses(int a, int b, int c, int d) const {
  if (c == a || c == b || d == a || d == b) return false;
  return orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0;
}

void Triangulation::insert_constraint(int a, int b) {
  if (!was_inserted(a) || !was_inserted(b)) throw MeshError("constraint endpoint was not inserted");
  constrained_.insert(edge_key(a, b));
  if (find_edge(a, b).first >= 0) return;

  // Collect the edges crossed by segment ab.
  std::deque<std::pair<int, int>> crossing;
  int t = -1, x = -1, y = -1;
  for (int s : incident(a)) {
    const int k = index_in(s, a);
    const int p = tris_[static_cast<std::size_t>(s)].v[static_cast<std::size_t>((k + 1) % 3)];
    const int q = tris_[static_cast<std::size_t>(s)].v[static_cast<std::size_t>((k + 2) % 3)];
    if (on_open_ray(a, b, p) || on_open_ray(a, b, q)) throw MeshError("a vertex lies on a constrained segment");
    if (orient(a, p, b) > 0 && orient(a, b, q) > 0) {
      t = s;
      x = p;
      y = q;
      break;
    }
  }
  if (t < 0) throw MeshError("could not start constraint walk");
  while (true) {
    crossing.emplace_back(x, y);
    // Neighbour across (x, y).
    const int kx = index_in(t, x), ky = index_in(t, y);
    const int nt = tris_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(3 - kx - ky)];
    if (nt < 0) throw MeshError("constraint walk left the triangulation");
    const int kz = 3 - index_in(nt, x) - index_in(nt, y);
    const int z = tris_[static_cast<std::size_t>(nt)].v[static_cast<std::size_t>(kz)];
    if (z == b) break;
    const int o = orient(a, b, z);
    if (o == 0) throw MeshError("a vertex lies on a constrained segment");
    if (o > 0) {
      y = z;
    } else {
      x = z;
    }
    t = nt;
  }

  std::size_t stall = 0;
  while (!crossing.empty()) {
    const auto [p, q] = crossing.front();
    crossing.pop_front();
    const auto [s, i] = find_edge(p, q);
    if (s < 0) continue;
    const Tri& S = tris_[static_cast<std::size_t>(s)];
    const int u = S.n[static_cast<std::size_t>(i)];
    const int apex = S.v[static_cast<std::size_t>(i)];
    const int e1 = S.v[static_cast<std::size_t>((i + 1) % 3)];
    const int e2 = S.v[static_cast<std::size_t>((i + 2) % 3)];
    const int d = tris_[static_cast<std::size_t>(u)].v[static_cast<std::size_t>(neighbour_index(u, s))];
    if (orient(apex, e1, d) > 0 && orient(apex, d, e2) > 0) {
      flip(s, i);
      stall = 0;
      if (crosses(a, b, apex, d)) crossing.emplace_back(apex, d);
    } else {
      crossing.emplace_back(p, q);
      if (++stall > 4 * crossing.size() + 8) throw MeshError("constraint recovery stalled");
    }
  }
}

void Triangulation::restore_delaunay() {
  std::vector<std::pair<int, int>> stack;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (!tris_[t].alive) continue;
    for (int i = 0; i < 3; ++i) {
      const int a = tris_[t].v[static_cast<std::size_t>((i + 1) % 3)];
      const int b = tris_[t].v[static_cast<std::size_t>((i + 2) % 3)];
      if (a < b) stack.emplace_back(a, b);
    }
  }
  std::size_t guard = 0;
  while (!stack.empty()) {
    if (++guard > 100 * tris_.size() + 1000) throw MeshError("Delaunay restoration did not converge");
    const auto [p, q] = stack.back();
    stack.pop_back();
    if (constrained_.count(edge_key(p, q))) continue;
    const auto [s, i] = find_edge(p, q);
    if (s < 0) continue;
    const Tri& S = tris_[static_cast<std::size_t>(s)];
    const int u = S.n[static_cast<std::size_t>(i)];
    if (u < 0) continue;
    const int d = tris_[static_cast<std::size_t>(u)].v[static_cast<std::size_t>(neighbour_index(u, s))];
    if (in_circle(S.v[0], S.v[1], S.v[2], d) <= 0) continue;
    const int apex = S.v[static_cast<std::size_t>(i)];
    const int e1 = S.v[static_cast<std::size_t>((i + 1) % 3)];
    const int e2 = S.v[static_cast<std::size_t>((i + 2) % 3)];
    if (!(orient(apex, e1, d) > 0 && orient(apex, d, e2) > 0)) continue;
    flip(s, i);
    stack.emplace_back(apex, e1);
    stack.emplace_back(apex, e2);
    stack.emplace_back(d, e1);
    stack.emplace_back(d, e2);
  }
}

std::vector<std::array<int, 3>> Triangulation::triangles() const {
  std::vector<std::array<int, 3>> out;
  for (const Tri& t : tris_) {
    if (!t.alive) continue;
    if (t.v[0] >= n_input_ || t.v[1] >= n_input_ || t.v[2] >= n_input_) continue;
    out.push_back(t.v);
  }
  return out;
}

}  // namespace ccbm::geometry::detail
