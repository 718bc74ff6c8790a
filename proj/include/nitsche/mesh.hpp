#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nitsche/geometry.hpp"

namespace nitsche {

enum class FacetTag : std::uint8_t { Unclassified, Interior, Dirichlet, Neumann, Contact };

const char* to_string(FacetTag tag);

/// Displacement components constrained by a Dirichlet rule.
enum ComponentMask : unsigned { kNoComponent = 0, kComponentX = 1, kComponentY = 2, kComponentXY = 3 };

struct Facet {
  std::array<int, 2> vertices{};
  /// Adjacent triangles; the second entry is -1 for boundary facets.
  std::array<int, 2> triangles{-1, -1};
  FacetTag tag = FacetTag::Unclassified;
  unsigned dirichlet_components = kNoComponent;

  bool on_boundary() const { return triangles[1] < 0; }
};

/// One boundary classification rule, evaluated on the facet midpoint.
struct BoundaryRule {
  std::string name;
  FacetTag tag = FacetTag::Neumann;
  unsigned components = kNoComponent;
  std::function<bool(const Vec2&)> matches;
};

struct BoundarySpec {
  std::vector<BoundaryRule> rules;
};

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Diagonal layout of the structured block triangulation.
enum class DiagonalPattern {
  /// Every cell split along its lower-left to upper-right diagonal.
  Uniform,
  /// Lower half of the rows as in Uniform, upper half mirrored, so the mesh is
  /// symmetric about the horizontal midline when the row count is even.
  MirrorY,
};

/// Conforming triangulation of one body.
///
/// Triangles are stored counter-clockwise as (v0, v1, v2) with the refinement
/// edge (v0, v1) and the newest vertex v2. Local edge k joins v_k and v_{k+1}.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, int body_id);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::array<int, 3>& triangle_facets(int t) const { return triangle_facets_[t]; }
  int body_id() const { return body_id_; }
  /// Index of the parent triangle in the mesh this one was refined from.
  const std::vector<int>& parents() const { return parents_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  Vec2 vertex(int i) const { return vertices_[i]; }
  double area(int t) const;
  /// Longest edge of the triangle.
  double diameter(int t) const;
  double min_angle(int t) const;
  Vec2 centroid(int t) const;
  double facet_length(int f) const;
  Vec2 facet_midpoint(int f) const;
  /// Unit normal of the facet, pointing out of its first adjacent triangle.
  Vec2 facet_normal(int f) const;
  /// Facet joining vertices a and b, or -1.
  int find_facet(int a, int b) const;
  std::vector<int> facets_with_tag(FacetTag tag) const;
  bool is_classified() const;

 private:
  friend Mesh classify_boundary(const Mesh& mesh, const BoundarySpec& spec);
  friend Mesh bisect_refine(const Mesh& mesh, std::span<const int> marked);
  friend Mesh refine_uniform(const Mesh& mesh);

  void build_facets();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> triangle_facets_;
  std::vector<int> parents_;
  std::unordered_map<std::uint64_t, int> facet_index_;
  int body_id_ = 1;
};

/// Structured triangulation of an axis-aligned rectangle, two triangles per cell.
Mesh generate_block_mesh(const Rect& rect, int nx, int ny, int body_id = 1,
                         DiagonalPattern pattern = DiagonalPattern::Uniform);

/// Tags every boundary facet with the single rule matching its midpoint.
/// Throws ClassificationError when a facet matches no rule or several.
Mesh classify_boundary(const Mesh& mesh, const BoundarySpec& spec);

/// Newest-vertex bisection of the marked triangles with conforming closure.
/// Boundary tags are inherited by the halves of bisected facets.
Mesh bisect_refine(const Mesh& mesh, std::span<const int> marked);

/// Two rounds of bisection on every triangle (each triangle becomes four).
Mesh refine_uniform(const Mesh& mesh);

/// Facet-adjacency audit: positive areas, every edge shared by at most two
/// triangles, boundary edges lying on the outer boundary only (no hanging nodes).
bool audit_conformity(const Mesh& mesh, std::string* reason = nullptr);

/// ASCII dump: `vertices N triangles M`, then `x y` lines, then `i j k tag` lines
/// where tag is the body id.
void write_mesh_ascii(std::ostream& os, const Mesh& mesh);
Mesh read_mesh_ascii(std::istream& is);

}  // namespace nitsche
