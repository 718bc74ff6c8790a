#pragma once

#include <array>
#include <vector>

#include "nitsche/contact.hpp"

namespace nitsche {

/// Residual estimator contributions. All per-entity values are squared except
/// the oscillation; facet vectors are indexed by facet id and hold zero for
/// facets outside the family.
struct EstimatorReport {
  std::array<std::vector<double>, 2> element;
  std::array<std::vector<double>, 2> interior;
  std::array<std::vector<double>, 2> contact;
  std::array<std::vector<double>, 2> neumann;
  std::array<std::vector<double>, 2> oscillation;
  /// Per-triangle marking indicator; sums to eta^2.
  std::array<std::vector<double>, 2> aggregate;

  double element_total = 0.0;
  double interior_total = 0.0;
  double contact_total = 0.0;
  double neumann_total = 0.0;
  double eta = 0.0;
  double S = 0.0;
  double oscillation_total = 0.0;  ///< sqrt of the summed osc_K^2

  double eta_squared() const { return element_total + interior_total + contact_total + neumann_total; }
};

/// h_K^2 / mu || div sigma(u_h) + f ||^2 on one triangle. `u` holds the body's coefficients.
double element_estimator(const Discretization& disc, int body, const Vector& u, int triangle);

/// h_E / mu || [sigma(u_h) n] ||^2 on an interior facet. Throws ArgumentError otherwise.
double interior_facet_estimator(const Discretization& disc, int body, const Vector& u, int facet);

/// h_E / mu || sigma(u_h) n - g ||^2 on a Neumann facet, g the prescribed traction.
double neumann_facet_estimator(const Discretization& disc, int body, const Vector& u, int facet);

/// Contact facet contributions of both bodies, indexed [body][facet].
std::array<std::vector<double>, 2> contact_facet_estimators(const Discretization& disc,
                                                            const NitscheConfig& cfg,
                                                            const Vector& u,
                                                            const std::vector<double>& lambda);

/// S = sqrt(((jump u_n)_+, lambda_h)_Gamma) at the interface points.
double complementarity_estimator(const Discretization& disc, const Vector& u,
                                 const std::vector<double>& lambda);

/// h_K || f - P_p f ||_K with P_p the elementwise L2 projection.
double oscillation(const FeSpace& space, const VectorField& f, int triangle);

/// Full report for a displacement and its multiplier samples.
EstimatorReport estimate(const Discretization& disc, const NitscheConfig& cfg, const Vector& u,
                         const std::vector<double>& lambda);
EstimatorReport estimate(const Discretization& disc, const NitscheConfig& cfg,
                         const SolveResult& result);

}  // namespace nitsche
