#include "nitsche/contact.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace nitsche {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Weighted: return "weighted";
    case Variant::MasterSlave: return "master-slave";
    case Variant::Juntunen: return "juntunen";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "weighted") return Variant::Weighted;
  if (name == "master-slave") return Variant::MasterSlave;
  if (name == "juntunen") return Variant::Juntunen;
  throw ArgumentError("unknown variant '" + name + "' (valid: weighted, master-slave, juntunen)");
}

void NitscheConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be positive");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
}

InterfaceCoefficients interface_coefficients(double h1, double h2, const MaterialParams& m1,
                                             const MaterialParams& m2, double alpha) {
  if (!(h1 > 0.0) || !(h2 > 0.0)) throw GeometryError("interface segment with zero-length parent");
  const double d = h1 * m2.mu + h2 * m1.mu;
  InterfaceCoefficients c;
  c.w1 = h1 * m2.mu / d;
  c.w2 = h2 * m1.mu / d;
  c.beta = m1.mu * m2.mu / (alpha * d);
  c.gamma = alpha * h1 * h2 / d;
  return c;
}

double InterfacePoint::apply(const Eigen::VectorXd& functional, const Vector& u) const {
  double s = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) s += functional[i] * u[dofs[i]];
  return s;
}

namespace {

void check_body(const Body& b, int index) {
  if (!b.mesh) throw ArgumentError("body " + std::to_string(index + 1) + " has no mesh");
  if (!b.mesh->is_classified()) {
    throw ArgumentError("body " + std::to_string(index + 1) + " mesh is not classified");
  }
}

}  // namespace

Discretization::Discretization(const ContactProblem& problem) : problem_(problem) {
  local_node_count(problem.degree);
  for (int b = 0; b < 2; ++b) {
    check_body(problem_.bodies[b], b);
    spaces_[b] = std::make_shared<const FeSpace>(problem_.bodies[b].mesh, problem_.degree,
                                                 problem_.bodies[b].pins);
  }
  const int n = num_dofs();

  std::vector<Eigen::Triplet<double>> triplets;
  load_ = Vector::Zero(n);
  mask_.assign(static_cast<std::size_t>(n), 0);
  for (int b = 0; b < 2; ++b) {
    const Body& body = problem_.bodies[b];
    const SparseMatrix k = assemble_bulk(*spaces_[b], body.material);
    const int off = offset(b);
    for (int col = 0; col < k.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
        triplets.emplace_back(off + it.row(), off + it.col(), it.value());
      }
    }
    const int nb = spaces_[b]->num_dofs();
    if (body.load) load_.segment(off, nb) += assemble_load(*spaces_[b], body.load);
    if (body.traction) load_.segment(off, nb) += assemble_traction(*spaces_[b], body.traction);
    const auto& m = spaces_[b]->dirichlet_mask();
    std::copy(m.begin(), m.end(), mask_.begin() + off);
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(triplets.begin(), triplets.end());

  segments_ = build_interface(*problem_.bodies[0].mesh, *problem_.bodies[1].mesh);
  const LineRule line = gauss_line(points_per_segment());
  for (int s = 0; s < static_cast<int>(segments_.size()); ++s) {
    const InterfaceSegment& seg = segments_[s];
    const Vec2 nrm = seg.normal;
    for (std::size_t k = 0; k < line.points.size(); ++k) {
      InterfacePoint q;
      q.segment = s;
      q.x = seg.a + line.points[k] * (seg.b - seg.a);
      q.weight = line.weights[k] * seg.length();
      const int ls = spaces_[0]->local_size();
      q.dofs.resize(4 * ls);
      q.jump = Eigen::VectorXd::Zero(4 * ls);
      q.traction1 = Eigen::VectorXd::Zero(4 * ls);
      q.traction2 = Eigen::VectorXd::Zero(4 * ls);
      for (int b = 0; b < 2; ++b) {
        const Mesh& mesh = *problem_.bodies[b].mesh;
        const int facet = b == 0 ? seg.parent1 : seg.parent2;
        const int t = mesh.facets()[facet].triangles[0];
        q.triangle[b] = t;
        q.reference[b] = ElementMap::of(mesh, t).to_reference(q.x);
        const ElementBasis basis = spaces_[b]->basis(t, q.reference[b]);
        const auto nodes = spaces_[b]->element_nodes(t);
        const MaterialParams& mat = problem_.bodies[b].material;
        const double sign = b == 0 ? -1.0 : 1.0;
        Eigen::VectorXd& tr = b == 0 ? q.traction1 : q.traction2;
        for (int a = 0; a < ls; ++a) {
          const Vec2& g = basis.gradients[a];
          const double dn = g.dot(nrm);
          for (int c = 0; c < 2; ++c) {
            const int i = 2 * ls * b + 2 * a + c;
            q.dofs[i] = offset(b) + FeSpace::dof(nodes[a], c);
            q.jump[i] = sign * basis.values[a] * nrm[c];
            tr[i] = 2.0 * mat.mu * dn * nrm[c] + mat.lambda * g[c];
          }
        }
      }
      points_.push_back(std::move(q));
    }
  }
}

Vector Discretization::body_coefficients(const Vector& u, int body) const {
  return u.segment(offset(body), spaces_[body]->num_dofs());
}

int slave_body(const Discretization& disc) {
  return disc.material(0).mu >= disc.material(1).mu ? 1 : 0;
}

namespace {

struct PointData {
  InterfaceCoefficients c;
  int slave = 1;
  double slave_h = 0.0;
  double slave_mu = 0.0;
};

PointData point_data(const Discretization& disc, const NitscheConfig& cfg, int q) {
  const InterfacePoint& p = disc.points()[q];
  const InterfaceSegment& seg = disc.segments()[p.segment];
  PointData d;
  d.c = interface_coefficients(seg.h1, seg.h2, disc.material(0), disc.material(1), cfg.alpha);
  d.slave = slave_body(disc);
  d.slave_h = d.slave == 0 ? seg.h1 : seg.h2;
  d.slave_mu = disc.material(d.slave).mu;
  return d;
}

const Eigen::VectorXd& slave_traction(const InterfacePoint& p, int slave) {
  return slave == 0 ? p.traction1 : p.traction2;
}

}  // namespace

Eigen::VectorXd lh_functional(const Discretization& disc, const NitscheConfig& cfg, int q) {
  const InterfacePoint& p = disc.points()[q];
  const PointData d = point_data(disc, cfg, q);
  if (cfg.variant == Variant::MasterSlave) {
    return -slave_traction(p, d.slave) - (d.slave_mu / (cfg.alpha * d.slave_h)) * p.jump;
  }
  return -(d.c.w1 * p.traction1 + d.c.w2 * p.traction2) - d.c.beta * p.jump;
}

double lh_eval(const Discretization& disc, const NitscheConfig& cfg, const Vector& u, int q) {
  return disc.points()[q].apply(lh_functional(disc, cfg, q), u);
}

std::vector<char> detect_active_set(const Discretization& disc, const NitscheConfig& cfg,
                                    const Vector& u) {
  std::vector<char> active(disc.points().size());
  for (std::size_t q = 0; q < active.size(); ++q) {
    active[q] = lh_eval(disc, cfg, u, static_cast<int>(q)) > 0.0;
  }
  return active;
}

std::vector<double> reconstruct_lambda(const Discretization& disc, const NitscheConfig& cfg,
                                       const Vector& u, bool clamp) {
  std::vector<double> lambda(disc.points().size());
  for (std::size_t q = 0; q < lambda.size(); ++q) {
    const double l = lh_eval(disc, cfg, u, static_cast<int>(q));
    lambda[q] = clamp ? std::max(0.0, l) : l;
  }
  return lambda;
}

SparseMatrix assemble_nitsche(const Discretization& disc, const NitscheConfig& cfg,
                              const std::vector<char>& active) {
  if (active.size() != disc.points().size()) {
    throw ArgumentError("active indicator length does not match the interface points");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (int q = 0; q < static_cast<int>(active.size()); ++q) {
    if (!active[q] && cfg.drop_inactive_terms) continue;
    const InterfacePoint& p = disc.points()[q];
    const PointData d = point_data(disc, cfg, q);
    const Eigen::VectorXd& j = p.jump;
    Eigen::MatrixXd m;
    if (cfg.variant == Variant::MasterSlave) {
      const Eigen::VectorXd& ts = slave_traction(p, d.slave);
      const double c = cfg.alpha * d.slave_h / d.slave_mu;
      if (active[q]) {
        m = (1.0 / c) * j * j.transpose() + ts * j.transpose() + j * ts.transpose();
      } else {
        m = -c * ts * ts.transpose();
      }
    } else {
      const Eigen::VectorXd mean = d.c.w1 * p.traction1 + d.c.w2 * p.traction2;
      if (active[q]) {
        m = d.c.beta * j * j.transpose() + mean * j.transpose() + j * mean.transpose();
        if (cfg.variant == Variant::Weighted) {
          const Eigen::VectorXd diff = p.traction1 - p.traction2;
          m -= d.c.gamma * diff * diff.transpose();
        }
      } else if (cfg.variant == Variant::Weighted) {
        const InterfaceSegment& seg = disc.segments()[p.segment];
        m = -cfg.alpha * (seg.h1 / disc.material(0).mu * p.traction1 * p.traction1.transpose() +
                          seg.h2 / disc.material(1).mu * p.traction2 * p.traction2.transpose());
      } else {
        m = -(1.0 / d.c.beta) * mean * mean.transpose();
      }
    }
    m *= p.weight;
    const auto n = static_cast<int>(p.dofs.size());
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (m(a, b) != 0.0) triplets.emplace_back(p.dofs[a], p.dofs[b], m(a, b));
      }
    }
  }
  SparseMatrix out(disc.num_dofs(), disc.num_dofs());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Vector solve_linear(const Discretization& disc, const SparseMatrix& matrix, const Vector& rhs) {
  const ConstrainedSystem sys = apply_dirichlet(matrix, rhs, disc.dirichlet_mask());
  if (sys.matrix.rows() == 0) return sys.expand(Vector());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.matrix);
  if (ldlt.info() == Eigen::Success) {
    const Vector dvec = ldlt.vectorD().cwiseAbs();
    if (dvec.minCoeff() < 1e-13 * dvec.maxCoeff()) {
      throw SolverError("singular system (check the Dirichlet constraints)");
    }
    return sys.expand(ldlt.solve(sys.rhs));
  }
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(sys.matrix);
  lu.factorize(sys.matrix);
  if (lu.info() != Eigen::Success) {
    throw SolverError("factorisation failed: " + lu.lastErrorMessage());
  }
  const Vector x = lu.solve(sys.rhs);
  if (!x.allFinite()) throw SolverError("singular system (check the Dirichlet constraints)");
  return sys.expand(x);
}

FieldFunction SolveResult::field(const Discretization& disc, int body) const {
  return FieldFunction(disc.space_ptr(body), disc.body_coefficients(u, body));
}

namespace {

bool satisfies(const Discretization& disc, const SparseMatrix& matrix, const Vector& u,
               double tol) {
  const ConstrainedSystem sys = apply_dirichlet(matrix, disc.load(), disc.dirichlet_mask());
  const Vector ur = sys.restrict(u);
  const Vector au = sys.matrix * ur;
  const double scale = std::max(sys.rhs.norm(), au.norm());
  if (scale == 0.0) return true;
  return (au - sys.rhs).norm() <= tol * scale;
}

}  // namespace

SolveResult solve(const Discretization& disc, const NitscheConfig& cfg,
                  const std::vector<char>* initial) {
  cfg.validate();
  std::vector<char> active(disc.points().size(), 1);
  if (initial != nullptr) {
    if (initial->size() != active.size()) {
      throw ArgumentError("initial active indicator length does not match the interface points");
    }
    active = *initial;
  }
  std::vector<std::vector<char>> seen;
  std::vector<IterationRecord> history;
  Vector previous = Vector::Zero(disc.num_dofs());
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const SparseMatrix system = disc.stiffness() + assemble_nitsche(disc, cfg, active);
    Vector u = solve_linear(disc, system, disc.load());
    std::vector<char> next = detect_active_set(disc, cfg, u);
    IterationRecord rec;
    for (std::size_t q = 0; q < next.size(); ++q) rec.changed += next[q] != active[q];
    const double un = u.norm();
    rec.update = un > 0.0 ? (u - previous).norm() / un : (u - previous).norm();
    history.push_back(rec);

    bool done = rec.changed == 0;
    if (!done) {
      done = satisfies(disc, disc.stiffness() + assemble_nitsche(disc, cfg, next), u,
                       cfg.tolerance);
    }
    if (done) {
      SolveResult r;
      r.lambda = reconstruct_lambda(disc, cfg, u);
      r.u = std::move(u);
      r.active = std::move(next);
      r.iterations = it;
      r.history = std::move(history);
      return r;
    }
    if (std::find(seen.begin(), seen.end(), next) != seen.end()) {
      throw NonConvergenceError("active set cycles after " + std::to_string(it) + " iterations",
                                history);
    }
    seen.push_back(active);
    active = std::move(next);
    previous = std::move(u);
  }
  throw NonConvergenceError(
      "active set not converged in " + std::to_string(cfg.max_iterations) + " iterations",
      history);
}

std::vector<char> transfer_active_set(const Discretization& from, const std::vector<char>& active,
                                      const Discretization& to) {
  std::vector<char> out(to.points().size(), 1);
  if (from.points().empty() || active.size() != from.points().size()) return out;
  const Vec2 n = from.segments().front().normal;
  const Vec2 t(-n.y(), n.x());
  std::vector<std::pair<double, char>> old;
  old.reserve(active.size());
  for (std::size_t q = 0; q < active.size(); ++q) old.emplace_back(t.dot(from.points()[q].x), active[q]);
  std::sort(old.begin(), old.end());
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double s = t.dot(to.points()[q].x);
    auto it = std::lower_bound(old.begin(), old.end(), std::make_pair(s, char(0)));
    if (it == old.end()) {
      --it;
    } else if (it != old.begin() && s - std::prev(it)->first < it->first - s) {
      --it;
    }
    out[q] = it->second;
  }
  return out;
}

}  // namespace nitsche
