#pragma once

#include <Eigen/Dense>

namespace nitsche {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Twice the signed area of the triangle (a, b, c); positive for counter-clockwise order.
inline double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

}  // namespace nitsche
