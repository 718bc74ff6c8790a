#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "nitsche/errors.hpp"
#include "nitsche/fem.hpp"
#include "nitsche/quadrature.hpp"

using namespace nitsche;

namespace {

std::shared_ptr<const Mesh> lower_block(int nx, int ny, unsigned components = kComponentX) {
  BoundarySpec spec;
  spec.rules.push_back({"dirichlet", FacetTag::Dirichlet, components,
                        [](const Vec2& x) { return std::abs(x.x() - 0.5) < 1e-12; }});
  spec.rules.push_back({"rest", FacetTag::Neumann, kNoComponent,
                        [](const Vec2& x) { return std::abs(x.x() - 0.5) >= 1e-12; }});
  return std::make_shared<const Mesh>(
      classify_boundary(generate_block_mesh({0.5, 0.25, 1.0, 0.75}, nx, ny), spec));
}

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

}  // namespace

TEST_CASE("gauss line rules") {
  for (int n = 1; n <= 8; ++n) {
    const LineRule r = gauss_line(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("triangle rules integrate monomials") {
  // Integral of x^a y^b over the reference triangle is a! b! / (a+b+2)!.
  auto exact = [](int a, int b) {
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
  };
  for (int d : {1, 2, 3, 4, 6, 9, 12}) {
    const TriangleRule r = triangle_rule(d);
    CHECK(r.degree >= d);
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.points.size(); ++i) {
          s += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
        }
        CHECK(s == doctest::Approx(exact(a, b)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("plane-strain material") {
  const MaterialParams m = MaterialParams::from_young(1.0, 0.3);
  CHECK(m.mu == doctest::Approx(0.38461538461538464).epsilon(1e-15));
  CHECK(m.lambda == doctest::Approx(0.57692307692307687).epsilon(1e-15));
  const Mat2 s = stress(m, Mat2::Identity());
  CHECK(s(0, 0) == doctest::Approx(1.9230769230769231).epsilon(1e-15));
  CHECK(s(0, 1) == 0.0);
  Mat2 dev;
  dev << 1, 0, 0, -1;
  CHECK((stress(m, dev) - 2 * m.mu * dev).norm() == 0.0);
  CHECK(stress(m, Mat2::Zero()).norm() == 0.0);
  CHECK_THROWS_AS(MaterialParams::from_young(1.0, 0.49), ArgumentError);
  CHECK_THROWS_AS(MaterialParams::from_young(0.0, 0.3), ArgumentError);

  Mat2 e1, e2;
  e1 << 0.3, 0.1, 0.1, -0.7;
  e2 << -1.1, 0.4, 0.4, 2.0;
  CHECK((stress(m, 2.5 * e1 - 0.5 * e2) - (2.5 * stress(m, e1) - 0.5 * stress(m, e2))).norm() <
        1e-14);
}

TEST_CASE("traction split") {
  Mat2 s;
  s << -1, 0, 0, 0;
  auto a = traction_split(s, {1.0, 0.0});
  CHECK(a.normal == -1.0);
  CHECK(a.tangential.norm() == 0.0);
  auto b = traction_split(s, {-1.0, 0.0});
  CHECK(b.normal == -1.0);
  s << 0, 1, 1, 0;
  auto c = traction_split(s, {1.0, 0.0});
  CHECK(c.normal == 0.0);
  CHECK(c.tangential == Vec2(0.0, 1.0));
  CHECK_THROWS_AS(traction_split(s, {2.0, 0.0}), ArgumentError);
}

TEST_CASE("shape functions") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int degree : {1, 2}) {
    const int n = local_node_count(degree);
    for (int k = 0; k < 20; ++k) {
      double x = u(rng), y = u(rng);
      if (x + y > 1) x = 1 - x, y = 1 - y;
      std::array<double, kMaxLocalNodes> phi;
      std::array<Vec2, kMaxLocalNodes> g;
      shape_values(degree, {x, y}, phi);
      shape_gradients(degree, {x, y}, g);
      double s = 0;
      Vec2 gs = Vec2::Zero();
      for (int i = 0; i < n; ++i) s += phi[i], gs += g[i];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(gs.norm() < 1e-13);
      // finite-difference gradient check
      const double h = 1e-6;
      std::array<double, kMaxLocalNodes> px, py;
      shape_values(degree, {x + h, y}, px);
      shape_values(degree, {x, y + h}, py);
      for (int i = 0; i < n; ++i) {
        CHECK((px[i] - phi[i]) / h == doctest::Approx(g[i].x()).epsilon(1e-5).scale(1));
        CHECK((py[i] - phi[i]) / h == doctest::Approx(g[i].y()).epsilon(1e-5).scale(1));
      }
    }
  }
}

TEST_CASE("P2 reproduces quadratics") {
  const auto mesh = lower_block(3, 2);
  auto space = std::make_shared<const FeSpace>(mesh, 2);
  CHECK(space->num_dofs() == 2 * (mesh->num_vertices() + mesh->num_facets()));
  const auto c = interpolate(*space, [](const Vec2& x) {
    return Vec2(x.x() * x.x(), x.x() * x.y() - 2 * x.y() * x.y());
  });
  FieldFunction f(space, c);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    double a = u(rng), b = u(rng);
    if (a + b > 1) a = 1 - a, b = 1 - b;
    const Vec2 x = ElementMap::of(*mesh, t).to_physical({a, b});
    const Vec2 v = f.value(t, {a, b});
    CHECK(std::abs(v.x() - x.x() * x.x()) < 1e-12);
    CHECK(std::abs(v.y() - (x.x() * x.y() - 2 * x.y() * x.y())) < 1e-12);
    const Mat2 g = f.gradient(t, {a, b});
    CHECK(std::abs(g(0, 0) - 2 * x.x()) < 1e-12);
    CHECK(std::abs(g(1, 1) - (x.x() - 4 * x.y())) < 1e-12);
  }
}

TEST_CASE("strain of linear fields") {
  const auto mesh = lower_block(2, 2);
  auto space = std::make_shared<const FeSpace>(mesh, 1);
  FieldFunction a(space, interpolate(*space, [](const Vec2& x) { return Vec2(x.x(), 0.0); }));
  Mat2 e;
  e << 1, 0, 0, 0;
  CHECK((strain(a, 0, {0.2, 0.3}) - e).norm() < 1e-14);
  FieldFunction b(space, interpolate(*space, [](const Vec2& x) { return Vec2(x.y(), x.x()); }));
  e << 0, 1, 1, 0;
  CHECK((strain(b, 3, {0.1, 0.1}) - e).norm() < 1e-14);
  FieldFunction z(space, Vector::Zero(space->num_dofs()));
  CHECK(strain(z, 1, {0.3, 0.3}).norm() == 0.0);
}

TEST_CASE("bulk stiffness") {
  const MaterialParams mat = MaterialParams::from_young(1.0, 0.3);
  for (int degree : {1, 2}) {
    const auto mesh = lower_block(3, 3);
    const FeSpace space(mesh, degree);
    const SparseMatrix k = assemble_bulk(space, mat);
    CHECK(max_abs(k - SparseMatrix(k.transpose())) < 1e-14 * max_abs(k));

    const Vector tx = interpolate(space, [](const Vec2&) { return Vec2(1.0, 0.0); });
    const Vector rot = interpolate(space, [](const Vec2& x) { return Vec2(-x.y(), x.x()); });
    CHECK((k * tx).norm() < 1e-13);
    CHECK(std::abs(rot.dot(k * rot)) < 1e-13);

    const Vector w = interpolate(space, [](const Vec2& x) { return Vec2(x.x(), 0.0); });
    CHECK(w.dot(k * w) == doctest::Approx((2 * mat.mu + mat.lambda) * 0.25).epsilon(1e-13));

    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    for (int r = 0; r < 5; ++r) {
      Vector v(space.num_dofs());
      for (auto& x : v) x = g(rng);
      CHECK(v.dot(k * v) >= -1e-12);
    }

    const TriangleRule higher = triangle_rule(degree == 1 ? 4 : 6);
    const SparseMatrix k2 = assemble_bulk(space, mat, &higher);
    CHECK(max_abs(k - k2) < 1e-12 * max_abs(k));
  }
}

TEST_CASE("load vectors") {
  const auto mesh = lower_block(4, 3);
  for (int degree : {1, 2}) {
    const FeSpace space(mesh, degree);
    const Vector zero = assemble_load(space, [](const Vec2&) { return Vec2::Zero(); });
    CHECK(zero.norm() == 0.0);
    const Vector one = assemble_load(space, [](const Vec2&) { return Vec2(1.0, 0.0); });
    double sx = 0, sy = 0;
    for (int i = 0; i < space.num_nodes(); ++i) sx += one[2 * i], sy += one[2 * i + 1];
    CHECK(sx == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(sy == 0.0);
    const Vector lin = assemble_load(space, [](const Vec2& x) { return Vec2(x.x() - 0.5, 0.0); });
    sx = 0;
    for (int i = 0; i < space.num_nodes(); ++i) sx += lin[2 * i];
    CHECK(sx == doctest::Approx(0.0625).epsilon(1e-14));

    // constant traction on the free sides: total = perimeter share of each side
    const Vector tr = assemble_traction(space, [](const Vec2&, const Vec2& n) { return n; });
    sx = 0, sy = 0;
    for (int i = 0; i < space.num_nodes(); ++i) sx += tr[2 * i], sy += tr[2 * i + 1];
    CHECK(sx == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(sy) < 1e-14);
  }
}

TEST_CASE("Dirichlet elimination") {
  const auto mesh = lower_block(2, 2, kComponentX);
  const FeSpace space(mesh, 1);
  const MaterialParams mat = MaterialParams::from_young(1.0, 0.3);
  const SparseMatrix k = assemble_bulk(space, mat);
  const Vector b = Vector::Ones(space.num_dofs());

  int fixed_x = 0, fixed_y = 0;
  for (int node = 0; node < space.num_nodes(); ++node) {
    fixed_x += space.dirichlet_mask()[FeSpace::dof(node, 0)];
    fixed_y += space.dirichlet_mask()[FeSpace::dof(node, 1)];
  }
  CHECK(fixed_x == 3);
  CHECK(fixed_y == 0);

  const ConstrainedSystem sys = apply_dirichlet(k, b, space);
  CHECK(max_abs(sys.matrix - SparseMatrix(sys.matrix.transpose())) == 0.0);
  CHECK(sys.matrix.rows() == space.num_dofs() - 3);

  std::vector<char> all(space.num_dofs(), 1);
  const ConstrainedSystem none = apply_dirichlet(k, b, all);
  CHECK(none.matrix.rows() == 0);
  CHECK(none.expand(Vector()).norm() == 0.0);

  const PointConstraint pin{Vec2(0.5, 0.25), kComponentY};
  const FeSpace pinned(mesh, 2, std::span<const PointConstraint>(&pin, 1));
  int fy = 0;
  for (int node = 0; node < pinned.num_nodes(); ++node) fy += pinned.dirichlet_mask()[2 * node + 1];
  CHECK(fy == 1);
  const PointConstraint bad{Vec2(0.51, 0.25), kComponentY};
  CHECK_THROWS_AS(FeSpace(mesh, 1, std::span<const PointConstraint>(&bad, 1)), ArgumentError);
}

TEST_CASE("von Mises") {
  const MaterialParams mat = MaterialParams::from_young(1.0, 0.3);
  CHECK(von_mises(mat, Mat2::Zero()) == 0.0);
  Mat2 e;
  e << 0, 0.5, 0.5, 0;
  CHECK(von_mises(mat, e) == doctest::Approx(std::sqrt(3.0) * mat.mu).epsilon(1e-14));
}
