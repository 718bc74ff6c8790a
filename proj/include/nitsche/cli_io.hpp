#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nitsche/study.hpp"

namespace nitsche {

/// Invalid configuration (unknown key, malformed value); maps to exit status 2.
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

struct RunConfig {
  std::string command;
  StudyConfig study;
  std::string out_dir = "out";
  bool csv = true;
  bool vtk = true;
  bool svg = true;
  /// Debug aid for verify: report raw l_h instead of its positive part.
  bool unclamped_lambda = false;
  /// Random instances in the verify oracle battery.
  int verify_instances = 20;
};

/// Applies one `key = value` setting. Keys follow the long flag names with
/// dashes or underscores: experiment, degree, variant, alpha, mode, theta,
/// max-dofs, max-steps, e1, e2, nu, nx1, ny1, nx2, ny2, out, csv, vtk, svg,
/// drop-inactive-terms, warm-start, patch-pressure, unclamped-lambda.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file; blank lines and lines starting with '#' are ignored.
void read_config(std::istream& in, RunConfig& cfg);
void read_config_file(const std::string& path, RunConfig& cfg);

/// Shortest decimal form that round-trips (printf %.17g).
std::string format_double(double v);

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(std::istream& is);

/// Log-log plot of eta + S against N with the regression line.
void write_convergence_svg(std::ostream& os, const std::vector<ConvergenceRecord>& records);

/// Both bodies coloured by log10 of the marking indicator (uniform grey without a report).
void write_mesh_svg(std::ostream& os, const Mesh& body1, const Mesh& body2,
                    const EstimatorReport* report = nullptr);

/// Legacy VTK unstructured grid of both bodies: displacement as point data,
/// von Mises stress and body id as cell data. Quadratic triangles are split
/// into four linear ones through the edge midpoints.
void write_vtk(std::ostream& os, const Discretization& disc, const Vector& u);

/// Interface profile `y,lambda,lh,active,segment` ordered along the interface.
void write_lambda_profile(std::ostream& os, const Discretization& disc, const NitscheConfig& cfg,
                          const SolveResult& sol);

/// JSON summary of an estimator report and solve statistics.
void write_estimator_summary(std::ostream& os, const Discretization& disc,
                             const NitscheConfig& cfg, const SolveResult& sol,
                             const EstimatorReport& report);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_mesh_dump(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line: `<prog> <subcommand> [flags]`. Returns the exit status:
/// 0 success, 1 failed run or verification, 2 invalid usage or configuration.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nitsche
