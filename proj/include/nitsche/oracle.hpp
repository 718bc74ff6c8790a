#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nitsche/contact.hpp"
#include "nitsche/experiments.hpp"

namespace nitsche {

/// Raised when no active pattern is consistent with the sign conditions.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stabilised mixed system with one multiplier value per interface point
/// (Lagrange basis of P_p at the segment Gauss points), restricted to the free
/// displacement dofs:
///   [ A   B ] [u]   [f]
///   [ B^T D ] [l] = [0]   on the active multiplier components.
struct MixedSystem {
  Eigen::MatrixXd A;  ///< stiffness minus the stabilisation on displacements
  Eigen::MatrixXd B;  ///< coupling, one column per interface point
  Eigen::VectorXd D;  ///< diagonal multiplier block (negative)
  Eigen::VectorXd f;
  std::vector<int> free_dofs;
};

MixedSystem assemble_mixed(const Discretization& disc, const NitscheConfig& cfg);

struct MixedSolution {
  Vector u;  ///< full length, both bodies
  std::vector<double> lambda;
  std::vector<char> active;
  long patterns_tried = 0;
  bool enumerated = false;
};

/// Solves the discrete variational inequality. Patterns are enumerated
/// exhaustively (fewest inactive points first) when the interface has at most
/// `enumeration_cap` points; otherwise a primal-dual active set iteration is used.
MixedSolution solve_mixed(const Discretization& disc, const NitscheConfig& cfg,
                          int enumeration_cap = 16);

/// Largest violation of the multiplier inequality over the point basis of the
/// cone: positive residual, broken complementarity, or a negative multiplier.
double check_vi_residual(const Discretization& disc, const NitscheConfig& cfg, const Vector& u,
                         const std::vector<double>& lambda);

struct SmallInstance {
  ContactProblem problem;
  std::string description;
};

/// Random pressing or bending instance (alternating with `index`, as is the
/// degree) with random non-matching meshes, optional local refinement of body 2
/// near the interface, random E2 and a random affine load on body 1. Resampled
/// until the interface has at most `max_points` points.
SmallInstance random_small_instance(std::mt19937& rng, int index, int max_points = 16);

}  // namespace nitsche
