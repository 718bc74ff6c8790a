#include "nitsche/estimator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace nitsche {

namespace {

Mat2 gradient_at(const FeSpace& space, const Vector& u, int t, const Vec2& ref) {
  const ElementBasis b = space.basis(t, ref);
  const auto nodes = space.element_nodes(t);
  Mat2 g = Mat2::Zero();
  for (int i = 0; i < b.size; ++i) {
    g.row(0) += u[FeSpace::dof(nodes[i], 0)] * b.gradients[i].transpose();
    g.row(1) += u[FeSpace::dof(nodes[i], 1)] * b.gradients[i].transpose();
  }
  return g;
}

Vec2 value_at(const FeSpace& space, const Vector& u, int t, const Vec2& ref) {
  std::array<double, kMaxLocalNodes> phi;
  shape_values(space.degree(), ref, phi);
  const auto nodes = space.element_nodes(t);
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < space.local_size(); ++i) {
    v.x() += phi[i] * u[FeSpace::dof(nodes[i], 0)];
    v.y() += phi[i] * u[FeSpace::dof(nodes[i], 1)];
  }
  return v;
}

Mat2 stress_at(const Discretization& disc, int body, const Vector& u, int t, const Vec2& x) {
  const FeSpace& space = disc.space(body);
  const Vec2 ref = ElementMap::of(space.mesh(), t).to_reference(x);
  return stress_from_gradient(disc.material(body), gradient_at(space, u, t, ref));
}

/// div sigma(u_h), constant on each triangle for degree <= 2.
Vec2 stress_divergence(const Discretization& disc, int body, const Vector& u, int t) {
  const FeSpace& space = disc.space(body);
  if (space.degree() == 1) return Vec2::Zero();
  std::array<Mat2, kMaxLocalNodes> href;
  shape_hessians(space.degree(), href);
  const Mat2 inv = ElementMap::of(space.mesh(), t).inverse;
  const auto nodes = space.element_nodes(t);
  std::array<Mat2, 2> h = {Mat2::Zero(), Mat2::Zero()};
  for (int a = 0; a < space.local_size(); ++a) {
    const Mat2 ha = inv.transpose() * href[a] * inv;
    for (int c = 0; c < 2; ++c) h[c] += u[FeSpace::dof(nodes[a], c)] * ha;
  }
  const MaterialParams& m = disc.material(body);
  Vec2 d;
  for (int i = 0; i < 2; ++i) {
    d[i] = m.mu * h[i].trace() + (m.mu + m.lambda) * (h[0](i, 0) + h[1](i, 1));
  }
  return d;
}

const TriangleRule& data_rule() {
  static const TriangleRule rule = triangle_rule(8);
  return rule;
}

const LineRule& facet_rule() {
  static const LineRule rule = gauss_line(4);
  return rule;
}

double negative_part_squared_integral(double j0, double jm, double j1) {
  // Quadratic through (0, j0), (1/2, jm), (1, j1), integrated as min(J, 0)^2 on [0, 1].
  const double a = 2.0 * j0 - 4.0 * jm + 2.0 * j1;
  const double b = -3.0 * j0 + 4.0 * jm - j1;
  const double c = j0;
  auto poly = [&](double s) { return (a * s + b) * s + c; };
  std::vector<double> cuts = {0.0, 1.0};
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return 0.0;
  if (std::abs(a) > 1e-14 * scale) {
    const double disc = b * b - 4.0 * a * c;
    if (disc > 0.0) {
      const double r = std::sqrt(disc);
      for (double s : {(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)}) {
        if (s > 0.0 && s < 1.0) cuts.push_back(s);
      }
    }
  } else if (std::abs(b) > 0.0) {
    const double s = -c / b;
    if (s > 0.0 && s < 1.0) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());
  const LineRule rule = gauss_line(3);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (poly(cuts[k] + 0.5 * len) >= 0.0) continue;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const double v = std::min(poly(cuts[k] + rule.points[i] * len), 0.0);
      total += rule.weights[i] * len * v * v;
    }
  }
  return total;
}

}  // namespace

double element_estimator(const Discretization& disc, int body, const Vector& u, int triangle) {
  const Mesh& mesh = disc.space(body).mesh();
  const VectorField& f = disc.problem().bodies[body].load;
  const Vec2 div = stress_divergence(disc, body, u, triangle);
  const ElementMap map = ElementMap::of(mesh, triangle);
  const TriangleRule& rule = data_rule();
  double norm2 = 0.0;
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    Vec2 r = div;
    if (f) r += f(map.to_physical(rule.points[k]));
    norm2 += rule.weights[k] * map.det * r.squaredNorm();
  }
  const double h = mesh.diameter(triangle);
  return h * h / disc.material(body).mu * norm2;
}

double interior_facet_estimator(const Discretization& disc, int body, const Vector& u,
                                int facet) {
  const Mesh& mesh = disc.space(body).mesh();
  const Facet& e = mesh.facets()[facet];
  if (e.tag != FacetTag::Interior || e.on_boundary()) {
    throw ArgumentError("facet " + std::to_string(facet) + " is not an interior facet");
  }
  const Vec2 pa = mesh.vertex(e.vertices[0]), pb = mesh.vertex(e.vertices[1]);
  const Vec2 n = mesh.facet_normal(facet);
  const double len = (pb - pa).norm();
  double norm2 = 0.0;
  const LineRule& rule = facet_rule();
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    const Vec2 x = pa + rule.points[k] * (pb - pa);
    const Vec2 jump = (stress_at(disc, body, u, e.triangles[0], x) -
                       stress_at(disc, body, u, e.triangles[1], x)) * n;
    norm2 += rule.weights[k] * len * jump.squaredNorm();
  }
  return len / disc.material(body).mu * norm2;
}

double neumann_facet_estimator(const Discretization& disc, int body, const Vector& u, int facet) {
  const Mesh& mesh = disc.space(body).mesh();
  const Facet& e = mesh.facets()[facet];
  if (e.tag != FacetTag::Neumann) {
    throw ArgumentError("facet " + std::to_string(facet) + " is not a Neumann facet");
  }
  const TractionField& g = disc.problem().bodies[body].traction;
  const Vec2 pa = mesh.vertex(e.vertices[0]), pb = mesh.vertex(e.vertices[1]);
  const Vec2 n = mesh.facet_normal(facet);
  const double len = (pb - pa).norm();
  double norm2 = 0.0;
  const LineRule& rule = facet_rule();
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    const Vec2 x = pa + rule.points[k] * (pb - pa);
    Vec2 r = stress_at(disc, body, u, e.triangles[0], x) * n;
    if (g) r -= g(x, n);
    norm2 += rule.weights[k] * len * r.squaredNorm();
  }
  return len / disc.material(body).mu * norm2;
}

std::array<std::vector<double>, 2> contact_facet_estimators(const Discretization& disc,
                                                            const NitscheConfig& cfg,
                                                            const Vector& u,
                                                            const std::vector<double>& lambda) {
  if (lambda.size() != disc.points().size()) {
    throw ArgumentError("multiplier samples do not match the interface points");
  }
  std::array<std::vector<double>, 2> out;
  std::array<Vector, 2> ub;
  for (int b = 0; b < 2; ++b) {
    out[b].assign(disc.space(b).mesh().num_facets(), 0.0);
    ub[b] = disc.body_coefficients(u, b);
  }
  const int np = disc.points_per_segment();
  const int slave = slave_body(disc);
  for (int s = 0; s < static_cast<int>(disc.segments().size()); ++s) {
    const InterfaceSegment& seg = disc.segments()[s];
    const std::array<int, 2> parent = {seg.parent1, seg.parent2};
    const std::array<double, 2> h = {seg.h1, seg.h2};
    const InterfaceCoefficients ic =
        interface_coefficients(seg.h1, seg.h2, disc.material(0), disc.material(1), cfg.alpha);
    std::array<double, 2> normal_res = {0.0, 0.0}, tangential = {0.0, 0.0};
    double mean_res = 0.0;
    for (int k = 0; k < np; ++k) {
      const int q = s * np + k;
      const InterfacePoint& p = disc.points()[q];
      std::array<double, 2> sn;
      for (int b = 0; b < 2; ++b) {
        const Mat2 sigma = stress_from_gradient(
            disc.material(b), gradient_at(disc.space(b), ub[b], p.triangle[b], p.reference[b]));
        const TractionSplit split = traction_split(sigma, seg.normal);
        sn[b] = split.normal;
        normal_res[b] += p.weight * std::pow(lambda[q] + sn[b], 2);
        tangential[b] += p.weight * split.tangential.squaredNorm();
      }
      mean_res += p.weight * std::pow(lambda[q] + ic.w1 * sn[0] + ic.w2 * sn[1], 2);
    }

    // Jump samples at the ends and midpoint of the segment for the penetration term.
    std::array<double, 3> j{};
    for (int k = 0; k < 3; ++k) {
      const Vec2 x = seg.a + 0.5 * k * (seg.b - seg.a);
      std::array<Vec2, 2> v;
      for (int b = 0; b < 2; ++b) {
        const Mesh& mesh = disc.space(b).mesh();
        const int t = mesh.facets()[parent[b]].triangles[0];
        v[b] = value_at(disc.space(b), ub[b], t, ElementMap::of(mesh, t).to_reference(x));
      }
      j[k] = (v[1] - v[0]).dot(seg.normal);
    }
    const double pen = negative_part_squared_integral(j[0], j[1], j[2]) * seg.length();

    for (int b = 0; b < 2; ++b) {
      const double mu = disc.material(b).mu;
      double v = h[b] / mu * tangential[b] + mu / h[b] * pen;
      if (cfg.variant == Variant::Weighted || (cfg.variant == Variant::MasterSlave && b == slave)) {
        v += h[b] / mu * normal_res[b];
      } else if (cfg.variant == Variant::Juntunen) {
        v += 0.5 * mean_res / ic.beta;
      }
      out[b][parent[b]] += v;
    }
  }
  return out;
}

double complementarity_estimator(const Discretization& disc, const Vector& u,
                                 const std::vector<double>& lambda) {
  if (lambda.size() != disc.points().size()) {
    throw ArgumentError("multiplier samples do not match the interface points");
  }
  double s2 = 0.0;
  for (std::size_t q = 0; q < lambda.size(); ++q) {
    const InterfacePoint& p = disc.points()[q];
    s2 += p.weight * std::max(0.0, p.apply(p.jump, u)) * lambda[q];
  }
  return std::sqrt(std::max(0.0, s2));
}

double oscillation(const FeSpace& space, const VectorField& f, int triangle) {
  if (!f) return 0.0;
  const Mesh& mesh = space.mesh();
  const ElementMap map = ElementMap::of(mesh, triangle);
  const TriangleRule& rule = data_rule();
  const int n = space.local_size();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  std::vector<std::array<double, kMaxLocalNodes>> phi(rule.points.size());
  std::vector<Vec2> fx(rule.points.size());
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    shape_values(space.degree(), rule.points[k], phi[k]);
    fx[k] = f(map.to_physical(rule.points[k]));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) mass(a, b) += rule.weights[k] * phi[k][a] * phi[k][b];
      rhs(a, 0) += rule.weights[k] * phi[k][a] * fx[k].x();
      rhs(a, 1) += rule.weights[k] * phi[k][a] * fx[k].y();
    }
  }
  const Eigen::MatrixXd coef = mass.ldlt().solve(rhs);
  double err2 = 0.0;
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    Vec2 proj = Vec2::Zero();
    for (int a = 0; a < n; ++a) proj += phi[k][a] * Vec2(coef(a, 0), coef(a, 1));
    err2 += rule.weights[k] * map.det * (fx[k] - proj).squaredNorm();
  }
  return mesh.diameter(triangle) * std::sqrt(err2);
}

EstimatorReport estimate(const Discretization& disc, const NitscheConfig& cfg, const Vector& u,
                         const std::vector<double>& lambda) {
  EstimatorReport r;
  r.contact = contact_facet_estimators(disc, cfg, u, lambda);
  double osc2 = 0.0;
  for (int b = 0; b < 2; ++b) {
    const Mesh& mesh = disc.space(b).mesh();
    const Vector ub = disc.body_coefficients(u, b);
    r.element[b].assign(mesh.num_triangles(), 0.0);
    r.oscillation[b].assign(mesh.num_triangles(), 0.0);
    r.interior[b].assign(mesh.num_facets(), 0.0);
    r.neumann[b].assign(mesh.num_facets(), 0.0);
    r.aggregate[b].assign(mesh.num_triangles(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      r.element[b][t] = element_estimator(disc, b, ub, t);
      r.oscillation[b][t] = oscillation(disc.space(b), disc.problem().bodies[b].load, t);
      r.aggregate[b][t] += r.element[b][t];
      r.element_total += r.element[b][t];
      osc2 += r.oscillation[b][t] * r.oscillation[b][t];
    }
    for (int f = 0; f < mesh.num_facets(); ++f) {
      const Facet& e = mesh.facets()[f];
      switch (e.tag) {
        case FacetTag::Interior: {
          const double v = interior_facet_estimator(disc, b, ub, f);
          r.interior[b][f] = v;
          r.interior_total += v;
          r.aggregate[b][e.triangles[0]] += 0.5 * v;
          r.aggregate[b][e.triangles[1]] += 0.5 * v;
          break;
        }
        case FacetTag::Neumann: {
          const double v = neumann_facet_estimator(disc, b, ub, f);
          r.neumann[b][f] = v;
          r.neumann_total += v;
          r.aggregate[b][e.triangles[0]] += v;
          break;
        }
        case FacetTag::Contact:
          r.contact_total += r.contact[b][f];
          r.aggregate[b][e.triangles[0]] += r.contact[b][f];
          break;
        default:
          break;
      }
    }
  }
  r.eta = std::sqrt(r.eta_squared());
  r.S = complementarity_estimator(disc, u, lambda);
  r.oscillation_total = std::sqrt(osc2);
  return r;
}

EstimatorReport estimate(const Discretization& disc, const NitscheConfig& cfg,
                         const SolveResult& result) {
  return estimate(disc, cfg, result.u, result.lambda);
}

}  // namespace nitsche
