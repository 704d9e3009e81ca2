#include "ccbm/geometry/hausdorff.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "ccbm/errors.hpp"

namespace ccbm::geometry {

namespace {

struct Segment {
  Point a, b;
};

std::vector<Segment> segments_of(std::span<const Polyline> loops) {
  std::vector<Segment> out;
  for (const Polyline& loop : loops) {
    if (loop.empty()) throw ArgumentError("hausdorff_distance: empty polyline");
    for (std::size_t i = 0; i < loop.size(); ++i) out.push_back({loop[i], loop[(i + 1) % loop.size()]});
  }
  if (out.empty()) throw ArgumentError("hausdorff_distance: empty polyline");
  return out;
}

// Distances from x to every target segment.
void distances(const Point& x, const std::vector<Segment>& target, std::vector<double>& out) {
  out.resize(target.size());
  for (std::size_t j = 0; j < target.size(); ++j) out[j] = distance_to_segment(x, target[j].a, target[j].b);
}

// Branch and bound on one source segment. Along the segment each d_j is
// convex, so max(d_j(s0), d_j(s1)) bounds d_j on [s0, s1] and the minimum of
// those bounds the distance to the target.
double segment_sup(const Segment& s, const std::vector<Segment>& target, double best) {
  constexpr double kTol = 1e-14;
  struct Node {
    double s0, s1;
    std::vector<double> d0, d1;
  };
  auto at = [&](double t) { return Point(s.a + t * (s.b - s.a)); };
  Node root{0.0, 1.0, {}, {}};
  distances(at(0.0), target, root.d0);
  distances(at(1.0), target, root.d1);
  std::vector<Node> stack;
  stack.push_back(std::move(root));
  std::vector<double> dm;
  while (!stack.empty()) {
    Node n = std::move(stack.back());
    stack.pop_back();
    const double f0 = *std::min_element(n.d0.begin(), n.d0.end());
    const double f1 = *std::min_element(n.d1.begin(), n.d1.end());
    best = std::max({best, f0, f1});
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < target.size(); ++j) upper = std::min(upper, std::max(n.d0[j], n.d1[j]));
    if (upper <= best + kTol || n.s1 - n.s0 < 1e-15) continue;
    const double sm = 0.5 * (n.s0 + n.s1);
    distances(at(sm), target, dm);
    Node right{sm, n.s1, dm, std::move(n.d1)};
    Node left{n.s0, sm, std::move(n.d0), dm};
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return best;
}

}  // namespace

double directed_hausdorff(std::span<const Polyline> a, std::span<const Polyline> b) {
  const auto src = segments_of(a);
  const auto dst = segments_of(b);
  double best = 0.0;
  for (const Segment& s : src) best = segment_sup(s, dst, best);
  return best;
}

double hausdorff_distance(std::span<const Polyline> a, std::span<const Polyline> b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  const Polyline pa(a.begin(), a.end());
  const Polyline pb(b.begin(), b.end());
  return hausdorff_distance(std::span(&pa, 1), std::span(&pb, 1));
}

}  // namespace ccbm::geometry
