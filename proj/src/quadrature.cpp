#include "nitsche/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "nitsche/errors.hpp"

namespace nitsche {

LineRule gauss_line(int n) {
  if (n < 1) throw ArgumentError("gauss_line needs at least one point");
  LineRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule triangle_rule(int degree) {
  TriangleRule rule;
  if (degree <= 2) {
    rule.degree = 2;
    const double a = 1.0 / 6.0, b = 2.0 / 3.0;
    rule.points = {Vec2(a, a), Vec2(b, a), Vec2(a, b)};
    rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return rule;
  }
  if (degree <= 4) {
    rule.degree = 4;
    const double a = 0.445948490915964886318329253883;
    const double wa = 0.223381589678011465944999455334 * 0.5;
    const double b = 0.091576213509770743459571463402;
    const double wb = 0.109951743655321867388333877999 * 0.5;
    rule.points = {Vec2(a, a), Vec2(1 - 2 * a, a), Vec2(a, 1 - 2 * a),
                   Vec2(b, b), Vec2(1 - 2 * b, b), Vec2(b, 1 - 2 * b)};
    rule.weights = {wa, wa, wa, wb, wb, wb};
    return rule;
  }
  // Collapsed (Duffy) rule: x = u, y = (1 - u) v, Jacobian (1 - u).
  const int n = (degree + 2) / 2 + 1;
  const LineRule g = gauss_line(n);
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i], v = g.points[j];
      rule.points.emplace_back(u, (1.0 - u) * v);
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace nitsche
