#include "nitsche/interface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nitsche/errors.hpp"

namespace nitsche {

namespace {

struct Interval {
  double s0, s1;
  Vec2 p0, p1;
  int facet;
  double h;
};

}  // namespace

std::vector<FacetTrace> contact_traces(const Mesh& mesh) {
  std::vector<FacetTrace> out;
  for (int f : mesh.facets_with_tag(FacetTag::Contact)) {
    const Facet& facet = mesh.facets()[f];
    out.push_back({f, mesh.vertex(facet.vertices[0]), mesh.vertex(facet.vertices[1])});
  }
  return out;
}

std::vector<InterfaceSegment> intersect_traces(std::span<const FacetTrace> gh1,
                                               std::span<const FacetTrace> gh2,
                                               const Vec2& normal1) {
  if (gh1.empty() || gh2.empty()) return {};
  const Vec2 n = normal1.normalized();
  const Vec2 t(-n.y(), n.x());

  Vec2 lo = gh1.front().a, hi = gh1.front().a;
  auto grow = [&](const Vec2& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (const auto& f : gh1) grow(f.a), grow(f.b);
  for (const auto& f : gh2) grow(f.a), grow(f.b);
  const double tol = 1e-12 * std::max((hi - lo).norm(), std::numeric_limits<double>::min());

  const Vec2 origin = gh1.front().a;
  const double offset = n.dot(origin);
  auto to_intervals = [&](std::span<const FacetTrace> traces) {
    std::vector<Interval> out;
    out.reserve(traces.size());
    for (const auto& f : traces) {
      if (std::abs(n.dot(f.a) - offset) > tol || std::abs(n.dot(f.b) - offset) > tol) {
        throw GeometryError("contact facet " + std::to_string(f.facet) +
                            " is not collinear with the interface line");
      }
      double s0 = t.dot(f.a - origin), s1 = t.dot(f.b - origin);
      Vec2 p0 = f.a, p1 = f.b;
      if (s0 > s1) {
        std::swap(s0, s1);
        std::swap(p0, p1);
      }
      out.push_back({s0, s1, p0, p1, f.facet, (f.b - f.a).norm()});
    }
    std::sort(out.begin(), out.end(),
              [](const Interval& x, const Interval& y) { return x.s0 < y.s0; });
    return out;
  };
  const auto i1 = to_intervals(gh1);
  const auto i2 = to_intervals(gh2);

  std::vector<InterfaceSegment> segments;
  std::size_t p = 0, q = 0;
  while (p < i1.size() && q < i2.size()) {
    const double s0 = std::max(i1[p].s0, i2[q].s0);
    const double s1 = std::min(i1[p].s1, i2[q].s1);
    if (s1 - s0 > tol) {
      InterfaceSegment seg;
      // Endpoints are copied from the facet vertices to avoid rounding drift.
      seg.a = i1[p].s0 >= i2[q].s0 ? i1[p].p0 : i2[q].p0;
      seg.b = i1[p].s1 <= i2[q].s1 ? i1[p].p1 : i2[q].p1;
      seg.parent1 = i1[p].facet;
      seg.parent2 = i2[q].facet;
      seg.h1 = i1[p].h;
      seg.h2 = i2[q].h;
      seg.normal = n;
      segments.push_back(seg);
    }
    if (i1[p].s1 < i2[q].s1) {
      ++p;
    } else {
      ++q;
    }
  }
  return segments;
}

std::vector<InterfaceSegment> build_interface(const Mesh& body1, const Mesh& body2) {
  const auto gh1 = contact_traces(body1);
  const auto gh2 = contact_traces(body2);
  if (gh1.empty() || gh2.empty()) return {};
  const Vec2 n = body1.facet_normal(gh1.front().facet);
  return intersect_traces(gh1, gh2, n);
}

}  // namespace nitsche
