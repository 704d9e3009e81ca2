#include "ccbm/geometry/curve.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <sstream>

#include "ccbm/errors.hpp"

namespace ccbm::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct KindName {
  CurveKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 9> kKindNames{{
    {CurveKind::circle, "circle"},
    {CurveKind::ellipse, "ellipse"},
    {CurveKind::square, "square"},
    {CurveKind::l_shape, "l_shape"},
    {CurveKind::peanut_c1, "peanut_c1"},
    {CurveKind::bean_c2, "bean_c2"},
    {CurveKind::kite_c3, "kite_c3"},
    {CurveKind::star_c4, "star_c4"},
    {CurveKind::polyline, "polyline"},
}};

bool is_piecewise_linear(CurveKind kind) {
  return kind == CurveKind::square || kind == CurveKind::l_shape || kind == CurveKind::polyline;
}

void require_params(const BoundaryCurve& c, std::size_t n) {
  if (c.parameters.size() < n) {
    throw ConfigurationError("curve '" + to_string(c.kind) + "' needs " + std::to_string(n) +
                             " parameters, got " + std::to_string(c.parameters.size()));
  }
}

Polyline corners_of(const BoundaryCurve& c) {
  switch (c.kind) {
    case CurveKind::square: {
      require_params(c, 3);
      const double x = c.parameters[0], y = c.parameters[1], s = c.parameters[2];
      return {Point(x - s, y - s), Point(x + s, y - s), Point(x + s, y + s), Point(x - s, y + s)};
    }
    case CurveKind::l_shape: {
      require_params(c, 3);
      const double x = c.parameters[0], y = c.parameters[1], s = c.parameters[2];
      return {Point(x - s, y - s), Point(x + s, y - s), Point(x + s, y), Point(x, y),
              Point(x, y + s),     Point(x - s, y + s)};
    }
    case CurveKind::polyline: {
      if (c.parameters.size() < 6 || c.parameters.size() % 2 != 0) {
        throw ConfigurationError("polyline curve needs an even number (>= 6) of coordinates");
      }
      Polyline p;
      for (std::size_t i = 0; i < c.parameters.size(); i += 2) {
        p.emplace_back(c.parameters[i], c.parameters[i + 1]);
      }
      if (signed_area(p) < 0.0) std::reverse(p.begin(), p.end());
      return p;
    }
    default:
      return {};
  }
}

// Catalog shapes before translation and scaling.
Point catalog_point(CurveKind kind, double t) {
  switch (kind) {
    case CurveKind::peanut_c1:
      return {0.195 + 0.4 * (std::cos(t) + 0.65 * std::cos(2.0 * t)), 0.55 * std::sin(t)};
    case CurveKind::bean_c2:
      return {0.64 * std::cos(t), 0.48 * std::sin(t) * (1.8 + std::cos(2.0 * t))};
    case CurveKind::kite_c3: {
      const double r = (0.6 + 0.54 * std::cos(t) + 0.06 * std::sin(2.0 * t)) / (1.0 + 0.75 * std::cos(t));
      return {-0.25 + r * std::cos(t), 0.05 + r * std::sin(t)};
    }
    case CurveKind::star_c4: {
      const double r = 0.4 * (1.0 + 0.75 * std::cos(5.0 * t + std::numbers::pi));
      return {r * std::cos(t), r * std::sin(t)};
    }
    default:
      throw ConfigurationError("not a catalog curve: " + to_string(kind));
  }
}

Point along_polyline(std::span<const Point> loop, double t) {
  const double total = perimeter(loop);
  double s = std::fmod(t, kTwoPi);
  if (s < 0.0) s += kTwoPi;
  s *= total / kTwoPi;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point& a = loop[i];
    const Point& b = loop[(i + 1) % loop.size()];
    const double len = (b - a).norm();
    if (s <= len || i + 1 == loop.size()) return a + std::min(s / len, 1.0) * (b - a);
    s -= len;
  }
  return loop.front();
}

}  // namespace

CurveKind curve_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  throw ConfigurationError("unknown curve kind '" + std::string(name) + "'");
}

std::string to_string(CurveKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return std::string(k.name);
  }
  return "unknown";
}

BoundaryCurve BoundaryCurve::circle(double cx, double cy, double r) {
  return {CurveKind::circle, {cx, cy, r}};
}
BoundaryCurve BoundaryCurve::ellipse(double cx, double cy, double a, double b) {
  return {CurveKind::ellipse, {cx, cy, a, b}};
}
BoundaryCurve BoundaryCurve::square(double cx, double cy, double half_side) {
  return {CurveKind::square, {cx, cy, half_side}};
}
BoundaryCurve BoundaryCurve::l_shape(double cx, double cy, double half_side) {
  return {CurveKind::l_shape, {cx, cy, half_side}};
}
BoundaryCurve BoundaryCurve::catalog(CurveKind kind, double cx, double cy, double scale) {
  return {kind, {cx, cy, scale}};
}
BoundaryCurve BoundaryCurve::from_polyline(const Polyline& points) {
  BoundaryCurve c{CurveKind::polyline, {}};
  for (const Point& p : points) {
    c.parameters.push_back(p.x());
    c.parameters.push_back(p.y());
  }
  return c;
}

BoundaryCurve parse_curve(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  if (!(in >> name)) throw ConfigurationError("empty curve description");
  BoundaryCurve c;
  c.kind = curve_kind_from_string(name);
  std::string token;
  while (in >> token) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
      throw ConfigurationError("curve '" + name + "': not a number: '" + token + "'");
    }
    c.parameters.push_back(v);
  }
  const std::size_t n = c.parameters.size();
  switch (c.kind) {
    case CurveKind::circle:
    case CurveKind::square:
    case CurveKind::l_shape:
      if (n != 3) throw ConfigurationError("curve '" + name + "' needs 3 parameters, got " + std::to_string(n));
      if (c.parameters[2] <= 0.0) throw ConfigurationError("curve '" + name + "': size must be positive");
      break;
    case CurveKind::ellipse:
      if (n != 4) throw ConfigurationError("curve 'ellipse' needs 4 parameters, got " + std::to_string(n));
      if (c.parameters[2] <= 0.0 || c.parameters[3] <= 0.0) {
        throw ConfigurationError("curve 'ellipse': semi-axes must be positive");
      }
      break;
    case CurveKind::polyline:
      if (n < 6 || n % 2 != 0) throw ConfigurationError("polyline curve needs an even number (>= 6) of coordinates");
      break;
    default:
      if (n != 0 && n != 3) throw ConfigurationError("curve '" + name + "' takes 0 or 3 parameters, got " + std::to_string(n));
      if (n == 3 && c.parameters[2] <= 0.0) throw ConfigurationError("curve '" + name + "': scale must be positive");
      break;
  }
  return c;
}

std::string to_string(const BoundaryCurve& curve) {
  std::string out = to_string(curve.kind);
  char buf[32];
  for (double v : curve.parameters) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out += buf;
  }
  return out;
}

Point evaluate_curve(const BoundaryCurve& c, double t) {
  switch (c.kind) {
    case CurveKind::circle:
      require_params(c, 3);
      return {c.parameters[0] + c.parameters[2] * std::cos(t), c.parameters[1] + c.parameters[2] * std::sin(t)};
    case CurveKind::ellipse:
      require_params(c, 4);
      return {c.parameters[0] + c.parameters[2] * std::cos(t), c.parameters[1] + c.parameters[3] * std::sin(t)};
    case CurveKind::square:
    case CurveKind::l_shape:
    case CurveKind::polyline:
      return along_polyline(corners_of(c), t);
    case CurveKind::peanut_c1:
    case CurveKind::bean_c2:
    case CurveKind::kite_c3:
    case CurveKind::star_c4: {
      const double cx = c.parameters.size() > 0 ? c.parameters[0] : 0.0;
      const double cy = c.parameters.size() > 1 ? c.parameters[1] : 0.0;
      const double scale = c.parameters.size() > 2 ? c.parameters[2] : 1.0;
      return Point(cx, cy) + scale * catalog_point(c.kind, t);
    }
  }
  throw ConfigurationError("unknown curve kind");
}

Polyline sample_curve(const BoundaryCurve& curve, int n) {
  if (n < 3) throw ArgumentError("sample_curve needs at least 3 points");
  if (is_piecewise_linear(curve.kind)) (void)corners_of(curve);  // validates parameters
  Polyline out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.push_back(evaluate_curve(curve, kTwoPi * k / n));
  return out;
}

Polyline curve_corners(const BoundaryCurve& curve) {
  return is_piecewise_linear(curve.kind) ? corners_of(curve) : Polyline{};
}

Polyline resample_polyline(std::span<const Point> loop, int n) {
  const double total = perimeter(loop);
  Polyline out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = total * k / n;
    while (seg + 1 < loop.size() && seg_start + (loop[(seg + 1) % loop.size()] - loop[seg]).norm() < s) {
      seg_start += (loop[(seg + 1) % loop.size()] - loop[seg]).norm();
      ++seg;
    }
    const Point& a = loop[seg];
    const Point& b = loop[(seg + 1) % loop.size()];
    const double len = (b - a).norm();
    out.push_back(len > 0.0 ? Point(a + std::clamp((s - seg_start) / len, 0.0, 1.0) * (b - a)) : a);
  }
  return out;
}

Polyline resample_by_arclength(const BoundaryCurve& curve, int n) {
  if (n < 3) throw ArgumentError("resample_by_arclength needs at least 3 points");
  if (!is_piecewise_linear(curve.kind)) {
    const int dense = std::max(64 * n, 4096);
    return resample_polyline(sample_curve(curve, dense), n);
  }
  const Polyline corners = corners_of(curve);
  const double total = perimeter(corners);
  const std::size_t m = corners.size();
  // Largest-remainder split of the n nodes over the sides, at least one per side.
  std::vector<int> per_side(m, 1);
  std::vector<double> remainder(m);
  int used = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double share = n * (corners[(i + 1) % m] - corners[i]).norm() / total;
    per_side[i] = std::max(1, static_cast<int>(std::floor(share)));
    remainder[i] = share - std::floor(share);
    used += per_side[i];
  }
  while (used < n) {
    const auto it = std::max_element(remainder.begin(), remainder.end());
    per_side[static_cast<std::size_t>(it - remainder.begin())] += 1;
    *it = -1.0;
    ++used;
  }
  Polyline out;
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = corners[i];
    const Point& b = corners[(i + 1) % m];
    for (int k = 0; k < per_side[i]; ++k) out.push_back(a + (static_cast<double>(k) / per_side[i]) * (b - a));
  }
  return out;
}

}  // namespace ccbm::geometry
