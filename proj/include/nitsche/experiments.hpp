#pragma once

#include <string>
#include <vector>

#include "nitsche/contact.hpp"

namespace nitsche {

/// Two-block test problems. The lower-left block [0.5,1]x[0.25,0.75] is pressed
/// against [1,1.6]x[0,1]; the patch problem uses [1,1.6]x[0.25,0.75] instead.
enum class Experiment { Pressing, Bending, Cosine, Patch };

const char* to_string(Experiment e);
/// Throws ArgumentError listing the valid ids.
Experiment parse_experiment(const std::string& id);
std::vector<std::string> experiment_ids();

struct MeshResolution {
  int nx1 = 3, ny1 = 3;
  int nx2 = 4, ny2 = 4;
};

struct ExperimentOptions {
  Experiment experiment = Experiment::Pressing;
  int degree = 1;
  double E1 = 1.0;
  double E2 = 1.0;
  double nu = 0.3;
  /// Defaults per experiment when left at zero (see default_resolution).
  MeshResolution resolution{0, 0, 0, 0};
  /// Compressive stress of the patch problem.
  double patch_pressure = 0.1;
};

MeshResolution default_resolution(Experiment e);
double default_alpha(int degree);

/// Problem on the initial meshes.
ContactProblem make_problem(const ExperimentOptions& opt);

/// Same data on new meshes.
ContactProblem with_meshes(const ContactProblem& problem, Mesh body1, Mesh body2);

/// Exact constant-stress solution of the patch problem.
struct PatchSolution {
  MaterialParams m1, m2;
  double pressure = 0.0;

  Mat2 strain(int body) const;
  Vec2 displacement(int body, const Vec2& x) const;
};

PatchSolution patch_solution(const ExperimentOptions& opt);

}  // namespace nitsche
