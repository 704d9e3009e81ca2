#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace ccbm::fem {

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by area).
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Segment rule on [0, 1]; weights sum to 1 (multiply by length).
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// 6-point rule, exact for degree 4.
inline const TriangleRule& triangle_rule_degree4() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    for (const auto& [x, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
      const double y = 1.0 - 2.0 * x;
      r.points.push_back({y, x, x});
      r.points.push_back({x, y, x});
      r.points.push_back({x, x, y});
      for (int k = 0; k < 3; ++k) r.weights.push_back(w);
    }
    return r;
  }();
  return rule;
}

/// 7-point rule, exact for degree 5.
inline const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.225);
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    for (const auto& [a, b, w] : {std::tuple{a1, b1, w1}, std::tuple{a2, b2, w2}}) {
      r.points.push_back({a, b, b});
      r.points.push_back({b, a, b});
      r.points.push_back({b, b, a});
      for (int k = 0; k < 3; ++k) r.weights.push_back(w);
    }
    return r;
  }();
  return rule;
}

/// 3-point Gauss-Legendre on [0, 1].
inline const EdgeRule& edge_rule_gauss3() {
  static const EdgeRule rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return EdgeRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

}  // namespace ccbm::fem
