#include "nitsche/fem.hpp"

#include <cmath>
#include <limits>

#include "nitsche/errors.hpp"

namespace nitsche {

MaterialParams MaterialParams::from_young(double E, double nu) {
  if (!(E > 0.0)) throw ArgumentError("Young's modulus must be positive");
  if (!(nu > -1.0) || nu > 0.45) {
    throw ArgumentError("Poisson ratio must lie in (-1, 0.45]");
  }
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  m.mu = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

int local_node_count(int degree) {
  if (degree == 1) return 3;
  if (degree == 2) return 6;
  throw ArgumentError("polynomial degree must be 1 or 2");
}

void shape_values(int degree, const Vec2& ref, std::span<double> out) {
  const double l0 = 1.0 - ref.x() - ref.y(), l1 = ref.x(), l2 = ref.y();
  if (degree == 1) {
    out[0] = l0;
    out[1] = l1;
    out[2] = l2;
    return;
  }
  out[0] = l0 * (2.0 * l0 - 1.0);
  out[1] = l1 * (2.0 * l1 - 1.0);
  out[2] = l2 * (2.0 * l2 - 1.0);
  out[3] = 4.0 * l0 * l1;
  out[4] = 4.0 * l1 * l2;
  out[5] = 4.0 * l2 * l0;
}

namespace {

const std::array<Vec2, 3> kBaryGrad = {Vec2(-1.0, -1.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
constexpr std::array<std::array<int, 2>, 3> kEdges = {{{0, 1}, {1, 2}, {2, 0}}};

}  // namespace

void shape_gradients(int degree, const Vec2& ref, std::span<Vec2> out) {
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) out[i] = kBaryGrad[i];
    return;
  }
  const std::array<double, 3> l = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
  for (int i = 0; i < 3; ++i) out[i] = (4.0 * l[i] - 1.0) * kBaryGrad[i];
  for (int e = 0; e < 3; ++e) {
    const auto [i, j] = kEdges[e];
    out[3 + e] = 4.0 * (l[j] * kBaryGrad[i] + l[i] * kBaryGrad[j]);
  }
}

void shape_hessians(int degree, std::span<Mat2> out) {
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) out[i].setZero();
    return;
  }
  for (int i = 0; i < 3; ++i) out[i] = 4.0 * kBaryGrad[i] * kBaryGrad[i].transpose();
  for (int e = 0; e < 3; ++e) {
    const auto [i, j] = kEdges[e];
    out[3 + e] = 4.0 * (kBaryGrad[i] * kBaryGrad[j].transpose() +
                        kBaryGrad[j] * kBaryGrad[i].transpose());
  }
}

ElementMap ElementMap::of(const Mesh& mesh, int triangle) {
  const auto& tri = mesh.triangles()[triangle];
  ElementMap m;
  m.origin = mesh.vertex(tri[0]);
  m.jacobian.col(0) = mesh.vertex(tri[1]) - m.origin;
  m.jacobian.col(1) = mesh.vertex(tri[2]) - m.origin;
  m.det = m.jacobian.determinant();
  m.inverse = m.jacobian.inverse();
  return m;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree,
                 std::span<const PointConstraint> pins)
    : mesh_(std::move(mesh)), degree_(degree) {
  local_node_count(degree);
  num_nodes_ = mesh_->num_vertices() + (degree == 2 ? mesh_->num_facets() : 0);
  dirichlet_.assign(static_cast<std::size_t>(num_dofs()), 0);
  for (int f = 0; f < mesh_->num_facets(); ++f) {
    const Facet& facet = mesh_->facets()[f];
    if (facet.tag != FacetTag::Dirichlet) continue;
    for (int node : facet_nodes(f)) {
      for (int c = 0; c < 2; ++c) {
        if (facet.dirichlet_components & (1u << c)) dirichlet_[dof(node, c)] = 1;
      }
    }
  }
  for (const PointConstraint& pin : pins) {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (int v = 0; v < mesh_->num_vertices(); ++v) {
      const double d = (mesh_->vertex(v) - pin.point).norm();
      if (d < dist) dist = d, best = v;
    }
    if (best < 0 || dist > 1e-9) {
      throw ArgumentError("point constraint does not coincide with a mesh vertex");
    }
    for (int c = 0; c < 2; ++c) {
      if (pin.components & (1u << c)) dirichlet_[dof(best, c)] = 1;
    }
  }
}

std::array<int, kMaxLocalNodes> FeSpace::element_nodes(int t) const {
  std::array<int, kMaxLocalNodes> nodes{};
  const auto& tri = mesh_->triangles()[t];
  for (int i = 0; i < 3; ++i) nodes[i] = tri[i];
  if (degree_ == 2) {
    const auto& fs = mesh_->triangle_facets(t);
    for (int e = 0; e < 3; ++e) nodes[3 + e] = mesh_->num_vertices() + fs[e];
  }
  return nodes;
}

Vec2 FeSpace::node_position(int node) const {
  if (node < mesh_->num_vertices()) return mesh_->vertex(node);
  return mesh_->facet_midpoint(node - mesh_->num_vertices());
}

std::vector<int> FeSpace::facet_nodes(int facet) const {
  const Facet& f = mesh_->facets()[facet];
  std::vector<int> nodes = {f.vertices[0], f.vertices[1]};
  if (degree_ == 2) nodes.push_back(mesh_->num_vertices() + facet);
  return nodes;
}

ElementBasis FeSpace::basis(int t, const Vec2& ref) const {
  ElementBasis b;
  b.size = local_size();
  shape_values(degree_, ref, b.values);
  std::array<Vec2, kMaxLocalNodes> g;
  shape_gradients(degree_, ref, g);
  const Mat2 inv_t = ElementMap::of(*mesh_, t).inverse.transpose();
  for (int i = 0; i < b.size; ++i) b.gradients[i] = inv_t * g[i];
  return b;
}

FieldFunction::FieldFunction(std::shared_ptr<const FeSpace> s, Vector c)
    : space(std::move(s)), coefficients(std::move(c)) {
  if (coefficients.size() != space->num_dofs()) {
    throw ArgumentError("coefficient vector length does not match the dof count");
  }
}

Vec2 FieldFunction::value(int t, const Vec2& ref) const {
  const ElementBasis b = space->basis(t, ref);
  const auto nodes = space->element_nodes(t);
  Vec2 u = Vec2::Zero();
  for (int i = 0; i < b.size; ++i) {
    u.x() += b.values[i] * coefficients[FeSpace::dof(nodes[i], 0)];
    u.y() += b.values[i] * coefficients[FeSpace::dof(nodes[i], 1)];
  }
  return u;
}

Mat2 FieldFunction::gradient(int t, const Vec2& ref) const {
  const ElementBasis b = space->basis(t, ref);
  const auto nodes = space->element_nodes(t);
  Mat2 g = Mat2::Zero();
  for (int i = 0; i < b.size; ++i) {
    g.row(0) += coefficients[FeSpace::dof(nodes[i], 0)] * b.gradients[i].transpose();
    g.row(1) += coefficients[FeSpace::dof(nodes[i], 1)] * b.gradients[i].transpose();
  }
  return g;
}

Vector interpolate(const FeSpace& space, const VectorField& u) {
  Vector c(space.num_dofs());
  for (int node = 0; node < space.num_nodes(); ++node) {
    const Vec2 v = u(space.node_position(node));
    c[FeSpace::dof(node, 0)] = v.x();
    c[FeSpace::dof(node, 1)] = v.y();
  }
  return c;
}

Mat2 strain(const FieldFunction& field, int t, const Vec2& ref) {
  const Mat2 g = field.gradient(t, ref);
  return 0.5 * (g + g.transpose());
}

Mat2 stress(const MaterialParams& mat, const Mat2& eps) {
  return 2.0 * mat.mu * eps + mat.lambda * eps.trace() * Mat2::Identity();
}

Mat2 stress_from_gradient(const MaterialParams& mat, const Mat2& grad) {
  return mat.mu * (grad + grad.transpose()) + mat.lambda * grad.trace() * Mat2::Identity();
}

TractionSplit traction_split(const Mat2& sigma, const Vec2& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw ArgumentError("normal must have unit length");
  const Vec2 traction = sigma * n;
  TractionSplit s;
  s.normal = traction.dot(n);
  s.tangential = traction - s.normal * n;
  return s;
}

double von_mises(const MaterialParams& mat, const Mat2& eps) {
  const Mat2 s = stress(mat, eps);
  const double szz = mat.lambda * eps.trace();
  const double sxx = s(0, 0), syy = s(1, 1), sxy = s(0, 1);
  return std::sqrt(0.5 * ((sxx - syy) * (sxx - syy) + (syy - szz) * (syy - szz) +
                          (szz - sxx) * (szz - sxx)) +
                   3.0 * sxy * sxy);
}

TriangleRule default_bulk_rule(int degree) { return triangle_rule(degree == 1 ? 2 : 4); }

SparseMatrix assemble_bulk(const FeSpace& space, const MaterialParams& mat,
                           const TriangleRule* rule) {
  const TriangleRule q = rule ? *rule : default_bulk_rule(space.degree());
  const Mesh& mesh = space.mesh();
  const int n = space.local_size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 4 * n * n);
  Eigen::MatrixXd ke(2 * n, 2 * n);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = ElementMap::of(mesh, t);
    const Mat2 inv_t = map.inverse.transpose();
    ke.setZero();
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      std::array<Vec2, kMaxLocalNodes> g;
      shape_gradients(space.degree(), q.points[k], g);
      for (int a = 0; a < n; ++a) g[a] = inv_t * g[a];
      const double w = q.weights[k] * map.det;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double gg = g[a].dot(g[b]);
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
              const double v = mat.mu * ((c == d ? gg : 0.0) + g[a][d] * g[b][c]) +
                               mat.lambda * g[a][c] * g[b][d];
              ke(2 * a + c, 2 * b + d) += w * v;
            }
          }
        }
      }
    }
    const auto nodes = space.element_nodes(t);
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < 2; ++c) {
        for (int b = 0; b < n; ++b) {
          for (int d = 0; d < 2; ++d) {
            triplets.emplace_back(FeSpace::dof(nodes[a], c), FeSpace::dof(nodes[b], d),
                                  ke(2 * a + c, 2 * b + d));
          }
        }
      }
    }
  }
  SparseMatrix k(space.num_dofs(), space.num_dofs());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

Vector assemble_load(const FeSpace& space, const VectorField& f, const TriangleRule* rule) {
  const TriangleRule q = rule ? *rule : default_bulk_rule(space.degree());
  const Mesh& mesh = space.mesh();
  const int n = space.local_size();
  Vector b = Vector::Zero(space.num_dofs());
  std::array<double, kMaxLocalNodes> phi;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = ElementMap::of(mesh, t);
    const auto nodes = space.element_nodes(t);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      shape_values(space.degree(), q.points[k], phi);
      const Vec2 fx = f(map.to_physical(q.points[k]));
      const double w = q.weights[k] * map.det;
      for (int a = 0; a < n; ++a) {
        b[FeSpace::dof(nodes[a], 0)] += w * phi[a] * fx.x();
        b[FeSpace::dof(nodes[a], 1)] += w * phi[a] * fx.y();
      }
    }
  }
  return b;
}

Vector assemble_traction(const FeSpace& space, const TractionField& g) {
  const Mesh& mesh = space.mesh();
  Vector b = Vector::Zero(space.num_dofs());
  if (!g) return b;
  const LineRule line = gauss_line(3);
  std::array<double, kMaxLocalNodes> phi;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets()[f];
    if (facet.tag != FacetTag::Neumann) continue;
    const int t = facet.triangles[0];
    const ElementMap map = ElementMap::of(mesh, t);
    const auto nodes = space.element_nodes(t);
    const Vec2 pa = mesh.vertex(facet.vertices[0]), pb = mesh.vertex(facet.vertices[1]);
    const Vec2 n = mesh.facet_normal(f);
    const double len = (pb - pa).norm();
    for (std::size_t k = 0; k < line.points.size(); ++k) {
      const Vec2 x = pa + line.points[k] * (pb - pa);
      shape_values(space.degree(), map.to_reference(x), phi);
      const Vec2 gx = g(x, n);
      const double w = line.weights[k] * len;
      for (int a = 0; a < space.local_size(); ++a) {
        b[FeSpace::dof(nodes[a], 0)] += w * phi[a] * gx.x();
        b[FeSpace::dof(nodes[a], 1)] += w * phi[a] * gx.y();
      }
    }
  }
  return b;
}

Vector ConstrainedSystem::expand(const Vector& x) const {
  Vector full = Vector::Zero(static_cast<Eigen::Index>(reduced.size()));
  for (std::size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] = x[i];
  return full;
}

Vector ConstrainedSystem::restrict(const Vector& full) const {
  Vector x(static_cast<Eigen::Index>(free_dofs.size()));
  for (std::size_t i = 0; i < free_dofs.size(); ++i) x[i] = full[free_dofs[i]];
  return x;
}

ConstrainedSystem apply_dirichlet(const SparseMatrix& matrix, const Vector& rhs,
                                  std::span<const char> constrained) {
  if (static_cast<Eigen::Index>(constrained.size()) != matrix.rows() ||
      matrix.rows() != rhs.size() || matrix.rows() != matrix.cols()) {
    throw ArgumentError("apply_dirichlet: size mismatch");
  }
  ConstrainedSystem sys;
  sys.reduced.assign(constrained.size(), -1);
  for (std::size_t i = 0; i < constrained.size(); ++i) {
    if (!constrained[i]) {
      sys.reduced[i] = static_cast<int>(sys.free_dofs.size());
      sys.free_dofs.push_back(static_cast<int>(i));
    }
  }
  const auto nf = static_cast<Eigen::Index>(sys.free_dofs.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(matrix.nonZeros()));
  for (int col = 0; col < matrix.outerSize(); ++col) {
    const int rc = sys.reduced[col];
    if (rc < 0) continue;
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      const int rr = sys.reduced[it.row()];
      if (rr >= 0) triplets.emplace_back(rr, rc, it.value());
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs = sys.restrict(rhs);
  return sys;
}

ConstrainedSystem apply_dirichlet(const SparseMatrix& matrix, const Vector& rhs,
                                  const FeSpace& space) {
  return apply_dirichlet(matrix, rhs, space.dirichlet_mask());
}

}  // namespace nitsche
