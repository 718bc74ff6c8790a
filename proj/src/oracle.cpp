#include "nitsche/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace nitsche {

namespace {

/// Stabilisation of one interface point: c (l + T u)(m + T v) expanded as
/// kappa l m + l (s . v) + m (s . u) + u^T S v.
struct PointStabilisation {
  double kappa = 0.0;
  Eigen::VectorXd s;
  Eigen::MatrixXd S;
};

PointStabilisation stabilisation(const Discretization& disc, const NitscheConfig& cfg, int q) {
  const InterfacePoint& p = disc.points()[q];
  const InterfaceSegment& seg = disc.segments()[p.segment];
  PointStabilisation st;
  const double c1 = cfg.alpha * seg.h1 / disc.material(0).mu;
  const double c2 = cfg.alpha * seg.h2 / disc.material(1).mu;
  switch (cfg.variant) {
    case Variant::Weighted:
      st.kappa = c1 + c2;
      st.s = c1 * p.traction1 + c2 * p.traction2;
      st.S = c1 * p.traction1 * p.traction1.transpose() + c2 * p.traction2 * p.traction2.transpose();
      break;
    case Variant::MasterSlave: {
      const bool first = slave_body(disc) == 0;
      const double c = first ? c1 : c2;
      const Eigen::VectorXd& t = first ? p.traction1 : p.traction2;
      st.kappa = c;
      st.s = c * t;
      st.S = c * t * t.transpose();
      break;
    }
    case Variant::Juntunen: {
      const InterfaceCoefficients ic =
          interface_coefficients(seg.h1, seg.h2, disc.material(0), disc.material(1), cfg.alpha);
      const Eigen::VectorXd mean = ic.w1 * p.traction1 + ic.w2 * p.traction2;
      st.kappa = 1.0 / ic.beta;
      st.s = st.kappa * mean;
      st.S = st.kappa * mean * mean.transpose();
      break;
    }
  }
  return st;
}

struct Reduced {
  const MixedSystem& sys;
  Eigen::MatrixXd Z;    // A^{-1} B
  Eigen::VectorXd z0;   // A^{-1} f
  Eigen::MatrixXd M;    // B^T A^{-1} B
  Eigen::VectorXd b0;   // B^T A^{-1} f
  Eigen::VectorXd wk;   // -D, the weight times kappa per point

  explicit Reduced(const MixedSystem& s) : sys(s) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(s.A);
    Z = lu.solve(s.B);
    z0 = lu.solve(s.f);
    M = s.B.transpose() * Z;
    b0 = s.B.transpose() * z0;
    wk = -s.D;
  }

  /// Multipliers of a pattern and the implied l_h = lambda + rho / (w kappa) at every point.
  void evaluate(const std::vector<char>& active, Eigen::VectorXd& lambda,
                Eigen::VectorXd& lh) const {
    const auto nq = static_cast<int>(active.size());
    std::vector<int> idx;
    for (int q = 0; q < nq; ++q) {
      if (active[q]) idx.push_back(q);
    }
    lambda = Eigen::VectorXd::Zero(nq);
    if (!idx.empty()) {
      const auto na = static_cast<int>(idx.size());
      Eigen::MatrixXd m(na, na);
      Eigen::VectorXd r(na);
      for (int i = 0; i < na; ++i) {
        r[i] = b0[idx[i]];
        for (int j = 0; j < na; ++j) m(i, j) = M(idx[i], idx[j]);
        m(i, i) += wk[idx[i]];
      }
      const Eigen::VectorXd la = m.partialPivLu().solve(r);
      for (int i = 0; i < na; ++i) lambda[idx[i]] = la[i];
    }
    const Eigen::VectorXd rho = b0 - M * lambda - wk.cwiseProduct(lambda);
    lh = lambda + rho.cwiseQuotient(wk);
  }

  Vector displacement(const Eigen::VectorXd& lambda, int n) const {
    const Eigen::VectorXd uf = z0 - Z * lambda;
    Vector u = Vector::Zero(n);
    for (std::size_t i = 0; i < sys.free_dofs.size(); ++i) u[sys.free_dofs[i]] = uf[i];
    return u;
  }
};

bool consistent(const std::vector<char>& active, const Eigen::VectorXd& lambda,
                const Eigen::VectorXd& lh, double tol) {
  for (std::size_t q = 0; q < active.size(); ++q) {
    if (active[q] ? lambda[q] < -tol : lh[q] > tol) return false;
  }
  return true;
}

MixedSolution finish(const Reduced& red, const Discretization& disc, std::vector<char> active,
                     const Eigen::VectorXd& lambda) {
  MixedSolution out;
  out.u = red.displacement(lambda, disc.num_dofs());
  out.lambda.assign(lambda.data(), lambda.data() + lambda.size());
  for (double& l : out.lambda) l = std::max(0.0, l);
  out.active = std::move(active);
  return out;
}

}  // namespace

MixedSystem assemble_mixed(const Discretization& disc, const NitscheConfig& cfg) {
  cfg.validate();
  const ConstrainedSystem cs = apply_dirichlet(disc.stiffness(), disc.load(), disc.dirichlet_mask());
  MixedSystem m;
  m.free_dofs = cs.free_dofs;
  m.A = Eigen::MatrixXd(cs.matrix);
  m.f = cs.rhs;
  const auto nq = static_cast<int>(disc.points().size());
  m.B = Eigen::MatrixXd::Zero(m.A.rows(), nq);
  m.D = Eigen::VectorXd::Zero(nq);
  for (int q = 0; q < nq; ++q) {
    const InterfacePoint& p = disc.points()[q];
    const PointStabilisation st = stabilisation(disc, cfg, q);
    m.D[q] = -p.weight * st.kappa;
    const auto n = static_cast<int>(p.dofs.size());
    for (int a = 0; a < n; ++a) {
      const int ra = cs.reduced[p.dofs[a]];
      if (ra < 0) continue;
      m.B(ra, q) += -p.weight * (p.jump[a] + st.s[a]);
      for (int b = 0; b < n; ++b) {
        const int rb = cs.reduced[p.dofs[b]];
        if (rb >= 0) m.A(ra, rb) -= p.weight * st.S(a, b);
      }
    }
  }
  return m;
}

MixedSolution solve_mixed(const Discretization& disc, const NitscheConfig& cfg,
                          int enumeration_cap) {
  const MixedSystem sys = assemble_mixed(disc, cfg);
  const Reduced red(sys);
  const auto nq = static_cast<int>(disc.points().size());
  if (nq == 0) throw ArgumentError("problem has no interface points");

  std::vector<char> active(nq, 1);
  Eigen::VectorXd lambda, lh;
  red.evaluate(active, lambda, lh);
  const double scale = std::max({lambda.cwiseAbs().maxCoeff(), lh.cwiseAbs().maxCoeff(),
                                 red.b0.cwiseQuotient(red.wk).cwiseAbs().maxCoeff(), 1e-300});
  const double tol = 1e-10 * scale;
  long tried = 1;

  if (nq <= enumeration_cap) {
    for (int inactive = 0; inactive <= nq; ++inactive) {
      // Masks with exactly `inactive` zeros, visited in lexicographic order.
      std::vector<char> pattern(nq, 1);
      std::fill(pattern.begin(), pattern.begin() + inactive, 0);
      do {
        red.evaluate(pattern, lambda, lh);
        ++tried;
        if (consistent(pattern, lambda, lh, tol)) {
          MixedSolution out = finish(red, disc, pattern, lambda);
          out.patterns_tried = tried;
          out.enumerated = true;
          return out;
        }
      } while (std::next_permutation(pattern.begin(), pattern.end()));
    }
    throw InfeasibleError("no consistent active pattern among " + std::to_string(tried) +
                          " candidates");
  }

  std::set<std::vector<char>> seen;
  for (int it = 0; it < 200; ++it) {
    std::vector<char> next(nq);
    for (int q = 0; q < nq; ++q) next[q] = lh[q] > 0.0;
    if (next == active && consistent(active, lambda, lh, tol)) {
      MixedSolution out = finish(red, disc, active, lambda);
      out.patterns_tried = tried;
      return out;
    }
    if (!seen.insert(active).second) break;
    active = std::move(next);
    red.evaluate(active, lambda, lh);
    ++tried;
  }
  throw InfeasibleError("primal-dual active set iteration did not settle");
}

double check_vi_residual(const Discretization& disc, const NitscheConfig& cfg, const Vector& u,
                         const std::vector<double>& lambda) {
  if (lambda.size() != disc.points().size()) {
    throw ArgumentError("multiplier samples do not match the interface points");
  }
  double worst = 0.0;
  for (int q = 0; q < static_cast<int>(lambda.size()); ++q) {
    const InterfacePoint& p = disc.points()[q];
    const PointStabilisation st = stabilisation(disc, cfg, q);
    // rho / w = -(jump(u) + s.u + kappa lambda)
    const double rho = -(p.apply(p.jump, u) + p.apply(st.s, u) + st.kappa * lambda[q]);
    worst = std::max({worst, rho, -lambda[q] * rho, -lambda[q]});
  }
  return worst;
}

SmallInstance random_small_instance(std::mt19937& rng, int index, int max_points) {
  std::uniform_int_distribution<int> pick(2, 5);
  std::uniform_int_distribution<int> rows(1, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    ExperimentOptions o;
    o.experiment = index % 2 == 0 ? Experiment::Pressing : Experiment::Bending;
    o.degree = index % 4 < 2 ? 1 : 2;
    o.E2 = std::pow(10.0, 2.0 * unit(rng) - 1.0);
    o.resolution = {pick(rng), pick(rng), pick(rng), 4 * rows(rng)};
    ContactProblem prob = make_problem(o);
    if (unit(rng) < 0.5) {
      const Mesh& m = *prob.bodies[1].mesh;
      std::vector<int> marked;
      for (int t = 0; t < m.num_triangles(); ++t) {
        if (m.centroid(t).x() < 1.1 && unit(rng) < 0.5) marked.push_back(t);
      }
      Mesh refined = bisect_refine(m, marked);
      prob = with_meshes(prob, Mesh(*prob.bodies[0].mesh), std::move(refined));
    }
    const double a = 0.6 * unit(rng) - 0.15, b = 2.0 * unit(rng) - 1.0, c = 0.2 * unit(rng) - 0.1;
    prob.bodies[0].load = [a, b, c](const Vec2& x) { return Vec2(a + b * (x.y() - 0.5), c); };
    if (static_cast<int>(Discretization(prob).points().size()) > max_points) continue;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s p=%d E2=%.3g res=%d,%d,%d,%d load=(%.3f%+.3f(y-0.5),%.3f)",
                  to_string(o.experiment), o.degree, o.E2, o.resolution.nx1, o.resolution.ny1,
                  o.resolution.nx2, o.resolution.ny2, a, b, c);
    return {std::move(prob), buf};
  }
}

}  // namespace nitsche
