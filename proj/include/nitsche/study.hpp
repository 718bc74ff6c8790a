#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nitsche/estimator.hpp"
#include "nitsche/experiments.hpp"

namespace nitsche {

enum class RefinementMode { Uniform, Adaptive };

const char* to_string(RefinementMode m);
RefinementMode parse_mode(const std::string& name);

struct StudyConfig {
  ExperimentOptions setup;
  Variant variant = Variant::Juntunen;
  /// Zero selects the degree-dependent default.
  double alpha = 0.0;
  bool drop_inactive_terms = true;
  RefinementMode mode = RefinementMode::Adaptive;
  double theta = 0.5;
  int max_dofs = 15000;
  int max_steps = 60;
  /// Start each contact solve from the active set of the previous mesh.
  bool warm_start = true;

  NitscheConfig solver_config() const;
  void validate() const;
};

struct ConvergenceRecord {
  int step = 0;
  int N = 0;
  double eta = 0.0;
  double S = 0.0;
  double eta_plus_S = 0.0;
  double element = 0.0;
  double interior = 0.0;
  double contact = 0.0;
  double neumann = 0.0;
  double oscillation = 0.0;
  int iterations = 0;
};

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  ContactProblem final_problem;
  SolveResult final_solution;
  EstimatorReport final_report;
};

/// Raised when a solve inside a study fails; carries the records obtained so far.
class StudyError : public std::runtime_error {
 public:
  StudyError(const std::string& what, std::vector<ConvergenceRecord> records)
      : std::runtime_error(what), records_(std::move(records)) {}
  const std::vector<ConvergenceRecord>& records() const { return records_; }

 private:
  std::vector<ConvergenceRecord> records_;
};

/// Smallest prefix of the indices sorted by decreasing indicator (ties by index)
/// whose sum reaches theta times the total.
std::vector<int> mark_dorfler(std::span<const double> indicators, double theta);

/// Dörfler marking over both bodies; body 1 triangles come first in the ordering.
std::array<std::vector<int>, 2> mark_dorfler(const EstimatorReport& report, double theta);

/// Dofs of a degree-p vector Lagrange space on the mesh, constrained ones included.
int count_dofs(const Mesh& mesh, int degree);

/// Optional per-step callback, e.g. for progress output.
using StudyObserver = std::function<void(const ConvergenceRecord&)>;

StudyResult run_study(const StudyConfig& cfg, const StudyObserver& observer = {});

/// Least-squares slope of log(eta + S) against log(N).
double regression_slope(std::span<const ConvergenceRecord> records);
double regression_slope(std::span<const double> N, std::span<const double> value);

/// Regression over records[first:], the default window dropping the coarsest mesh.
double window_slope(std::span<const ConvergenceRecord> records, std::size_t first = 1);

/// Worker count from NITSCHE_CONTACT_THREADS, else the hardware concurrency.
int worker_threads();

/// Runs independent studies on up to worker_threads() threads; results keep the input order.
std::vector<StudyResult> run_studies(const std::vector<StudyConfig>& configs);

}  // namespace nitsche
