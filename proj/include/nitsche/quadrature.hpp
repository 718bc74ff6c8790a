#pragma once

#include <vector>

#include "nitsche/geometry.hpp"

namespace nitsche {

/// Quadrature on the reference triangle {(0,0), (1,0), (0,1)}; weights sum to 1/2.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Quadrature on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// n-point Gauss-Legendre rule mapped to [0, 1] (exact to degree 2n-1).
LineRule gauss_line(int n);

/// Rule exact for polynomials of the given total degree. Degrees 1-2 use the
/// 3-point interior rule, 3-4 the 6-point symmetric rule, higher degrees a
/// collapsed tensor Gauss rule.
TriangleRule triangle_rule(int degree);

}  // namespace nitsche
