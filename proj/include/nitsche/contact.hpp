#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nitsche/errors.hpp"
#include "nitsche/fem.hpp"
#include "nitsche/interface.hpp"

namespace nitsche {

enum class Variant {
  Weighted,     ///< weighted average of both tractions, full stabilisation
  MasterSlave,  ///< traction of the softer body only
  Juntunen,     ///< weighted average, stabilised through the mean traction
};

const char* to_string(Variant v);
/// Parses "weighted", "master-slave" or "juntunen".
Variant parse_variant(const std::string& name);

struct NitscheConfig {
  Variant variant = Variant::Juntunen;
  double alpha = 1e-2;
  /// Omit the stabilisation term on the inactive part of the interface.
  bool drop_inactive_terms = true;
  int max_iterations = 50;
  /// Relative residual below which an iterate is accepted for a new active set.
  double tolerance = 1e-10;

  void validate() const;
};

/// One body of the contact problem.
struct Body {
  std::shared_ptr<const Mesh> mesh;
  MaterialParams material;
  VectorField load;         ///< volume force; empty means zero
  TractionField traction;   ///< data on Neumann facets; empty means traction free
  std::vector<PointConstraint> pins;
};

struct ContactProblem {
  std::array<Body, 2> bodies;
  int degree = 1;
};

/// Interface weights and stabilisation scalings on one segment.
struct InterfaceCoefficients {
  double w1 = 0.5;
  double w2 = 0.5;
  double beta = 0.0;
  double gamma = 0.0;
};

InterfaceCoefficients interface_coefficients(double h1, double h2, const MaterialParams& m1,
                                             const MaterialParams& m2, double alpha);

/// Quadrature point on the interface together with the linear functionals
/// jump(u) = (u2 - u1).n and the normal tractions n.sigma_i(u_i)n, stored as
/// dense coefficient vectors over `dofs`.
struct InterfacePoint {
  int segment = -1;
  Vec2 x;
  double weight = 0.0;              ///< quadrature weight times segment length
  std::array<int, 2> triangle{};    ///< parent triangle in each body
  std::array<Vec2, 2> reference{};  ///< reference coordinates in those triangles
  std::vector<int> dofs;            ///< global dofs, body 1 block then body 2 block
  Eigen::VectorXd jump;
  Eigen::VectorXd traction1;
  Eigen::VectorXd traction2;

  double apply(const Eigen::VectorXd& functional, const Vector& u) const;
};

/// Assembled pieces of a contact problem that do not depend on the active set.
class Discretization {
 public:
  explicit Discretization(const ContactProblem& problem);

  const ContactProblem& problem() const { return problem_; }
  int degree() const { return problem_.degree; }
  const FeSpace& space(int body) const { return *spaces_[body]; }
  const std::shared_ptr<const FeSpace>& space_ptr(int body) const { return spaces_[body]; }
  const MaterialParams& material(int body) const { return problem_.bodies[body].material; }
  int offset(int body) const { return body == 0 ? 0 : spaces_[0]->num_dofs(); }
  int num_dofs() const { return spaces_[0]->num_dofs() + spaces_[1]->num_dofs(); }

  /// Block-diagonal bulk stiffness of both bodies.
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Vector& load() const { return load_; }
  const std::vector<char>& dirichlet_mask() const { return mask_; }
  const std::vector<InterfaceSegment>& segments() const { return segments_; }
  const std::vector<InterfacePoint>& points() const { return points_; }
  int points_per_segment() const { return degree() + 1; }

  /// Coefficient of u for one body, extracted from the global vector.
  Vector body_coefficients(const Vector& u, int body) const;

 private:
  ContactProblem problem_;
  std::array<std::shared_ptr<const FeSpace>, 2> spaces_;
  SparseMatrix stiffness_;
  Vector load_;
  std::vector<char> mask_;
  std::vector<InterfaceSegment> segments_;
  std::vector<InterfacePoint> points_;
};

/// Index (0 or 1) of the body whose traction is used by the master-slave variant.
int slave_body(const Discretization& disc);

/// Coefficient vector c with l_h(u) = c . u at interface point q.
Eigen::VectorXd lh_functional(const Discretization& disc, const NitscheConfig& cfg, int q);
double lh_eval(const Discretization& disc, const NitscheConfig& cfg, const Vector& u, int q);

/// Active flag per interface point: l_h > 0 (ties count as inactive).
std::vector<char> detect_active_set(const Discretization& disc, const NitscheConfig& cfg,
                                    const Vector& u);

/// Interface contribution of the chosen variant for a fixed active set. The
/// right-hand side is unaffected since the initial gap is zero.
SparseMatrix assemble_nitsche(const Discretization& disc, const NitscheConfig& cfg,
                              const std::vector<char>& active);

struct IterationRecord {
  int changed = 0;       ///< points whose active flag changed after this solve
  double update = 0.0;   ///< relative change of the displacement
};

struct SolveResult {
  Vector u;  ///< both bodies, body 1 first
  std::vector<char> active;
  std::vector<double> lambda;
  int iterations = 0;
  std::vector<IterationRecord> history;

  FieldFunction field(const Discretization& disc, int body) const;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<IterationRecord> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<IterationRecord>& history() const { return history_; }

 private:
  std::vector<IterationRecord> history_;
};

/// Multiplier samples (l_h)_+ at the interface points. With clamp = false the raw
/// l_h values are returned (debugging aid).
std::vector<double> reconstruct_lambda(const Discretization& disc, const NitscheConfig& cfg,
                                       const Vector& u, bool clamp = true);

/// Solves the linear system of a fixed active set with Dirichlet elimination.
Vector solve_linear(const Discretization& disc, const SparseMatrix& matrix, const Vector& rhs);

/// Active-set fixed point. Starts from full contact unless an initial indicator is given.
SolveResult solve(const Discretization& disc, const NitscheConfig& cfg,
                  const std::vector<char>* initial = nullptr);

/// Carries an active indicator to the interface points of another discretisation
/// by taking the flag of the nearest old point along the interface.
std::vector<char> transfer_active_set(const Discretization& from, const std::vector<char>& active,
                                      const Discretization& to);

}  // namespace nitsche
