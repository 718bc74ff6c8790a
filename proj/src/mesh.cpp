#include "nitsche/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "nitsche/errors.hpp"

namespace nitsche {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct BoundaryLabel {
  FacetTag tag = FacetTag::Unclassified;
  unsigned components = kNoComponent;
};

}  // namespace

const char* to_string(FacetTag tag) {
  switch (tag) {
    case FacetTag::Unclassified: return "unclassified";
    case FacetTag::Interior: return "interior";
    case FacetTag::Dirichlet: return "dirichlet";
    case FacetTag::Neumann: return "neumann";
    case FacetTag::Contact: return "contact";
  }
  return "?";
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, int body_id)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), body_id_(body_id) {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) throw ArgumentError("triangle references a missing vertex");
    }
    if (signed_area2(vertices_[triangles_[t][0]], vertices_[triangles_[t][1]],
                     vertices_[triangles_[t][2]]) <= 0.0) {
      throw ArgumentError("triangle " + std::to_string(t) + " has nonpositive signed area");
    }
  }
  parents_.resize(triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) parents_[t] = t;
  build_facets();
}

void Mesh::build_facets() {
  facets_.clear();
  facet_index_.clear();
  triangle_facets_.assign(triangles_.size(), {-1, -1, -1});
  facets_.reserve(triangles_.size() * 3 / 2 + 4);
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      auto [it, inserted] = facet_index_.try_emplace(edge_key(a, b), num_facets());
      if (inserted) {
        Facet f;
        f.vertices = {a, b};
        f.triangles = {t, -1};
        facets_.push_back(f);
      } else {
        Facet& f = facets_[it->second];
        if (f.triangles[1] >= 0) {
          throw ArgumentError("edge shared by more than two triangles");
        }
        f.triangles[1] = t;
      }
      triangle_facets_[t][k] = it->second;
    }
  }
  for (Facet& f : facets_) {
    if (!f.on_boundary()) f.tag = FacetTag::Interior;
  }
}

double Mesh::area(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * signed_area2(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::diameter(int t) const {
  const auto& tri = triangles_[t];
  double h = 0.0;
  for (int k = 0; k < 3; ++k) {
    h = std::max(h, (vertices_[tri[k]] - vertices_[tri[(k + 1) % 3]]).norm());
  }
  return h;
}

double Mesh::min_angle(int t) const {
  const auto& tri = triangles_[t];
  double m = std::numbers::pi;
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = vertices_[tri[k]];
    const Vec2 a = vertices_[tri[(k + 1) % 3]] - p;
    const Vec2 b = vertices_[tri[(k + 2) % 3]] - p;
    const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    m = std::min(m, std::acos(c));
  }
  return m;
}

Vec2 Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double Mesh::facet_length(int f) const {
  return (vertices_[facets_[f].vertices[1]] - vertices_[facets_[f].vertices[0]]).norm();
}

Vec2 Mesh::facet_midpoint(int f) const {
  return 0.5 * (vertices_[facets_[f].vertices[0]] + vertices_[facets_[f].vertices[1]]);
}

Vec2 Mesh::facet_normal(int f) const {
  const Facet& facet = facets_[f];
  const Vec2 a = vertices_[facet.vertices[0]];
  const Vec2 b = vertices_[facet.vertices[1]];
  Vec2 n(b.y() - a.y(), a.x() - b.x());
  n.normalize();
  const Vec2 c = centroid(facet.triangles[0]);
  if (n.dot(c - a) > 0.0) n = -n;
  return n;
}

int Mesh::find_facet(int a, int b) const {
  auto it = facet_index_.find(edge_key(a, b));
  return it == facet_index_.end() ? -1 : it->second;
}

std::vector<int> Mesh::facets_with_tag(FacetTag tag) const {
  std::vector<int> out;
  for (int f = 0; f < num_facets(); ++f) {
    if (facets_[f].tag == tag) out.push_back(f);
  }
  return out;
}

bool Mesh::is_classified() const {
  return std::none_of(facets_.begin(), facets_.end(),
                      [](const Facet& f) { return f.tag == FacetTag::Unclassified; });
}

Mesh generate_block_mesh(const Rect& rect, int nx, int ny, int body_id,
                         DiagonalPattern pattern) {
  if (nx < 1 || ny < 1) throw ArgumentError("block mesh needs nx, ny >= 1");
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) {
    throw ArgumentError("block mesh rectangle is degenerate");
  }
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Endpoints are assigned exactly so that rational grids round-trip.
    const double y = j == ny ? rect.y1 : rect.y0 + rect.height() * j / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? rect.x1 : rect.x0 + rect.width() * i / nx;
      vertices.emplace_back(x, y);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      const bool rising = pattern == DiagonalPattern::Uniform || 2 * j < ny;
      if (rising) {
        // Diagonal a-c is the refinement edge of both halves.
        triangles.push_back({c, a, b});
        triangles.push_back({a, c, d});
      } else {
        triangles.push_back({b, d, a});
        triangles.push_back({d, b, c});
      }
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), body_id);
}

Mesh classify_boundary(const Mesh& mesh, const BoundarySpec& spec) {
  Mesh out = mesh;
  for (int f = 0; f < out.num_facets(); ++f) {
    Facet& facet = out.facets_[f];
    if (!facet.on_boundary()) {
      facet.tag = FacetTag::Interior;
      facet.dirichlet_components = kNoComponent;
      continue;
    }
    const Vec2 mid = out.facet_midpoint(f);
    const BoundaryRule* hit = nullptr;
    for (const BoundaryRule& rule : spec.rules) {
      if (!rule.matches(mid)) continue;
      if (hit != nullptr) {
        std::ostringstream msg;
        msg << "boundary facet " << f << " at (" << mid.x() << ", " << mid.y()
            << ") matches both '" << hit->name << "' and '" << rule.name << "'";
        throw ClassificationError(msg.str());
      }
      hit = &rule;
    }
    if (hit == nullptr) {
      std::ostringstream msg;
      msg << "boundary facet " << f << " at (" << mid.x() << ", " << mid.y()
          << ") matches no boundary rule";
      throw ClassificationError(msg.str());
    }
    facet.tag = hit->tag;
    facet.dirichlet_components = hit->tag == FacetTag::Dirichlet ? hit->components : 0u;
  }
  return out;
}

Mesh bisect_refine(const Mesh& mesh, std::span<const int> marked) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<std::array<int, 3>> tris = mesh.triangles();
  std::vector<int> origin(tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t) origin[t] = static_cast<int>(t);

  std::unordered_map<std::uint64_t, BoundaryLabel> boundary;
  for (const Facet& f : mesh.facets()) {
    if (f.on_boundary()) {
      boundary[edge_key(f.vertices[0], f.vertices[1])] = {f.tag, f.dirichlet_components};
    }
  }

  std::unordered_set<std::uint64_t> marked_edges;
  for (int t : marked) {
    if (t < 0 || t >= mesh.num_triangles()) throw ArgumentError("marked triangle out of range");
    marked_edges.insert(edge_key(tris[t][0], tris[t][1]));
  }
  if (marked_edges.empty()) return mesh;

  // Closure: a triangle with any marked edge must also bisect its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& tri : tris) {
      const std::uint64_t ref = edge_key(tri[0], tri[1]);
      if (marked_edges.count(ref)) continue;
      if (marked_edges.count(edge_key(tri[1], tri[2])) ||
          marked_edges.count(edge_key(tri[2], tri[0]))) {
        marked_edges.insert(ref);
        changed = true;
      }
    }
  }

  std::unordered_map<std::uint64_t, int> midpoints;
  auto midpoint_of = [&](int a, int b) {
    const std::uint64_t key = edge_key(a, b);
    auto [it, inserted] = midpoints.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) {
      vertices.push_back(0.5 * (vertices[a] + vertices[b]));
      auto bit = boundary.find(key);
      if (bit != boundary.end()) {
        const BoundaryLabel label = bit->second;
        boundary[edge_key(a, it->second)] = label;
        boundary[edge_key(it->second, b)] = label;
      }
    }
    return it->second;
  };

  // Children take the parent's two unrefined edges as refinement edges, so
  // repeated sweeps bisect every marked edge.
  for (bool any = true; any;) {
    any = false;
    std::vector<std::array<int, 3>> next;
    std::vector<int> next_origin;
    next.reserve(tris.size() * 2);
    next_origin.reserve(tris.size() * 2);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto [v0, v1, v2] = tris[t];
      if (!marked_edges.count(edge_key(v0, v1))) {
        next.push_back(tris[t]);
        next_origin.push_back(origin[t]);
        continue;
      }
      any = true;
      const int m = midpoint_of(v0, v1);
      next.push_back({v2, v0, m});
      next.push_back({v1, v2, m});
      next_origin.push_back(origin[t]);
      next_origin.push_back(origin[t]);
    }
    tris = std::move(next);
    origin = std::move(next_origin);
  }

  Mesh out(std::move(vertices), std::move(tris), mesh.body_id());
  out.parents_ = std::move(origin);
  for (Facet& f : out.facets_) {
    if (!f.on_boundary()) continue;
    auto it = boundary.find(edge_key(f.vertices[0], f.vertices[1]));
    if (it != boundary.end()) {
      f.tag = it->second.tag;
      f.dirichlet_components = it->second.components;
    }
  }
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) all[t] = t;
  Mesh once = bisect_refine(mesh, all);
  std::vector<int> all2(static_cast<std::size_t>(once.num_triangles()));
  for (int t = 0; t < once.num_triangles(); ++t) all2[t] = t;
  Mesh twice = bisect_refine(once, all2);
  // Report the history relative to the input mesh.
  std::vector<int> parents(twice.parents().size());
  for (std::size_t t = 0; t < parents.size(); ++t) {
    parents[t] = once.parents()[twice.parents()[t]];
  }
  twice.parents_ = std::move(parents);
  return twice;
}

bool audit_conformity(const Mesh& mesh, std::string* reason) {
  auto fail = [reason](std::string why) {
    if (reason != nullptr) *reason = std::move(why);
    return false;
  };
  std::unordered_map<std::uint64_t, int> count;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mesh.area(t) > 0.0)) return fail("triangle " + std::to_string(t) + " is not positive");
    const auto& tri = mesh.triangles()[t];
    for (int k = 0; k < 3; ++k) ++count[edge_key(tri[k], tri[(k + 1) % 3])];
  }
  double scale = 0.0;
  for (const Vec2& v : mesh.vertices()) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * std::max(scale, 1.0);
  for (const auto& [key, c] : count) {
    if (c > 2) return fail("edge shared by " + std::to_string(c) + " triangles");
    if (c == 2) continue;
    // A vertex strictly inside a single-sided edge is a hanging node.
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    const Vec2 pa = mesh.vertex(a), pb = mesh.vertex(b);
    const Vec2 d = pb - pa;
    const double len2 = d.squaredNorm();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (v == a || v == b) continue;
      const Vec2 w = mesh.vertex(v) - pa;
      const double s = w.dot(d) / len2;
      if (s <= 0.0 || s >= 1.0) continue;
      if (std::abs(d.x() * w.y() - d.y() * w.x()) / std::sqrt(len2) < tol) {
        return fail("hanging node " + std::to_string(v) + " on edge (" + std::to_string(a) +
                    ", " + std::to_string(b) + ")");
      }
    }
  }
  return true;
}

void write_mesh_ascii(std::ostream& os, const Mesh& mesh) {
  os << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles() << "\n";
  char buf[96];
  for (const Vec2& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    os << buf;
  }
  for (const auto& t : mesh.triangles()) {
    os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << mesh.body_id() << "\n";
  }
}

Mesh read_mesh_ascii(std::istream& is) {
  std::string w1, w2;
  int nv = 0, nt = 0;
  if (!(is >> w1 >> nv >> w2 >> nt) || w1 != "vertices" || w2 != "triangles" || nv < 0 ||
      nt < 0) {
    throw ArgumentError("mesh dump: malformed header");
  }
  std::vector<Vec2> vertices(static_cast<std::size_t>(nv));
  for (auto& v : vertices) {
    if (!(is >> v.x() >> v.y())) throw ArgumentError("mesh dump: truncated vertex list");
  }
  std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nt));
  int body = 1;
  for (auto& t : triangles) {
    if (!(is >> t[0] >> t[1] >> t[2] >> body)) {
      throw ArgumentError("mesh dump: truncated triangle list");
    }
  }
  return Mesh(std::move(vertices), std::move(triangles), body);
}

}  // namespace nitsche
