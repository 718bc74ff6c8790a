#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "nitsche/geometry.hpp"
#include "nitsche/mesh.hpp"
#include "nitsche/quadrature.hpp"

namespace nitsche {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using VectorField = std::function<Vec2(const Vec2&)>;
/// Boundary traction as a function of position and outward unit normal.
using TractionField = std::function<Vec2(const Vec2&, const Vec2&)>;

/// Isotropic plane-strain material.
struct MaterialParams {
  double E = 1.0;
  double nu = 0.3;
  double mu = 0.0;
  double lambda = 0.0;

  /// Lamé parameters from Young's modulus and Poisson ratio. Rejects E <= 0
  /// and nu outside (-1, 0.45]; nearly incompressible materials are out of range.
  static MaterialParams from_young(double E, double nu);
};

/// Displacement components fixed at the mesh vertex closest to `point`.
struct PointConstraint {
  Vec2 point;
  unsigned components = kComponentXY;
};

inline constexpr int kMaxLocalNodes = 6;

int local_node_count(int degree);

/// Lagrange shape functions on the reference triangle. Nodes are the three
/// vertices followed (for degree 2) by the midpoints of edges (0,1), (1,2), (2,0).
void shape_values(int degree, const Vec2& ref, std::span<double> out);
void shape_gradients(int degree, const Vec2& ref, std::span<Vec2> out);
/// Reference Hessians (constant per element for degree 2, zero for degree 1).
void shape_hessians(int degree, std::span<Mat2> out);

/// Affine map from the reference triangle.
struct ElementMap {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;

  static ElementMap of(const Mesh& mesh, int triangle);
  Vec2 to_physical(const Vec2& ref) const { return origin + jacobian * ref; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
};

/// Shape function values and physical gradients at one point of one element.
struct ElementBasis {
  int size = 0;
  std::array<double, kMaxLocalNodes> values{};
  std::array<Vec2, kMaxLocalNodes> gradients{};
};

/// Vector-valued continuous P1/P2 space on one body with its Dirichlet mask.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree,
          std::span<const PointConstraint> pins = {});

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int local_size() const { return local_node_count(degree_); }
  int num_nodes() const { return num_nodes_; }
  int num_dofs() const { return 2 * num_nodes_; }
  static int dof(int node, int component) { return 2 * node + component; }

  /// Global node numbers of triangle t in local order.
  std::array<int, kMaxLocalNodes> element_nodes(int t) const;
  Vec2 node_position(int node) const;
  /// Nodes lying on a facet: its two vertices, then the midpoint for degree 2.
  std::vector<int> facet_nodes(int facet) const;
  /// One flag per dof; true where the displacement component is fixed to zero.
  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }

  ElementBasis basis(int t, const Vec2& ref) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_ = 1;
  int num_nodes_ = 0;
  std::vector<char> dirichlet_;
};

/// A displacement field: space plus coefficient vector.
struct FieldFunction {
  std::shared_ptr<const FeSpace> space;
  Vector coefficients;

  FieldFunction(std::shared_ptr<const FeSpace> s, Vector c);
  Vec2 value(int t, const Vec2& ref) const;
  /// Displacement gradient, entry (i, j) = d u_i / d x_j.
  Mat2 gradient(int t, const Vec2& ref) const;
};

/// Coefficients interpolating a vector field at the Lagrange nodes.
Vector interpolate(const FeSpace& space, const VectorField& u);

Mat2 strain(const FieldFunction& field, int t, const Vec2& ref);
Mat2 stress(const MaterialParams& mat, const Mat2& eps);
/// Stress of a displacement gradient, without forming the strain explicitly.
Mat2 stress_from_gradient(const MaterialParams& mat, const Mat2& grad);

struct TractionSplit {
  double normal = 0.0;
  Vec2 tangential = Vec2::Zero();
};

/// Splits the traction sigma * n into its normal component (n . sigma n) and
/// tangential part. With n the outward normal of the body, both bodies report a
/// negative normal component under compression. Throws ArgumentError unless |n| = 1.
TractionSplit traction_split(const Mat2& sigma, const Vec2& n);

/// Plane-strain von Mises stress, including sigma_zz = lambda tr(eps).
double von_mises(const MaterialParams& mat, const Mat2& eps);

TriangleRule default_bulk_rule(int degree);

/// Stiffness matrix of (sigma(w), eps(v)) over the whole body, no constraints applied.
SparseMatrix assemble_bulk(const FeSpace& space, const MaterialParams& mat,
                           const TriangleRule* rule = nullptr);

/// Load vector of (f, v).
Vector assemble_load(const FeSpace& space, const VectorField& f,
                     const TriangleRule* rule = nullptr);

/// Load vector of (g, v) over the Neumann facets.
Vector assemble_traction(const FeSpace& space, const TractionField& g);

/// Linear system restricted to the unconstrained dofs.
struct ConstrainedSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<int> free_dofs;  ///< reduced index -> full index
  std::vector<int> reduced;    ///< full index -> reduced index, -1 if constrained

  /// Full-length vector with zeros at the constrained dofs.
  Vector expand(const Vector& x) const;
  Vector restrict(const Vector& full) const;
};

ConstrainedSystem apply_dirichlet(const SparseMatrix& matrix, const Vector& rhs,
                                  std::span<const char> constrained);
ConstrainedSystem apply_dirichlet(const SparseMatrix& matrix, const Vector& rhs,
                                  const FeSpace& space);

}  // namespace nitsche
