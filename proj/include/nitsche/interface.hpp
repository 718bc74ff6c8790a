#pragma once

#include <span>
#include <vector>

#include "nitsche/geometry.hpp"
#include "nitsche/mesh.hpp"

namespace nitsche {

/// Trace of one contact facet on the interface line.
struct FacetTrace {
  int facet = -1;
  Vec2 a;
  Vec2 b;
};

/// One element of the intersected interface mesh: the overlap of a body-1
/// contact facet with a body-2 contact facet.
struct InterfaceSegment {
  Vec2 a;  ///< start point (ordered along the interface direction)
  Vec2 b;  ///< end point
  int parent1 = -1;
  int parent2 = -1;
  double h1 = 0.0;  ///< length of the body-1 parent facet
  double h2 = 0.0;  ///< length of the body-2 parent facet
  Vec2 normal;      ///< unit normal pointing out of body 1

  double length() const { return (b - a).norm(); }
};

/// Contact facets of a classified mesh as traces.
std::vector<FacetTrace> contact_traces(const Mesh& mesh);

/// Intersects two families of collinear facets. `normal1` is the outward unit
/// normal of body 1 on the line. Overlaps shorter than 1e-12 times the extent
/// of the traces are discarded. Throws GeometryError when the facets are not
/// collinear within that tolerance.
std::vector<InterfaceSegment> intersect_traces(std::span<const FacetTrace> gh1,
                                               std::span<const FacetTrace> gh2,
                                               const Vec2& normal1);

/// Interface mesh of two classified meshes from their contact facets.
std::vector<InterfaceSegment> build_interface(const Mesh& body1, const Mesh& body2);

}  // namespace nitsche
