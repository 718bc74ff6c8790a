#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nitsche/experiments.hpp"
#include "nitsche/oracle.hpp"

using namespace nitsche;

namespace {

const Variant kVariants[] = {Variant::Weighted, Variant::MasterSlave, Variant::Juntunen};

NitscheConfig full_config(Variant v, int degree) {
  NitscheConfig c;
  c.variant = v;
  c.alpha = default_alpha(degree);
  c.drop_inactive_terms = false;
  return c;
}

double energy(const Discretization& disc, const Vector& u) {
  return std::sqrt(std::max(0.0, u.dot(disc.stiffness() * u)));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("mixed system structure") {
  ExperimentOptions o;
  o.degree = 2;
  const Discretization disc(make_problem(o));
  for (Variant v : kVariants) {
    const MixedSystem m = assemble_mixed(disc, full_config(v, 2));
    CHECK(m.B.cols() == static_cast<int>(disc.points().size()));
    CHECK(m.A.rows() == static_cast<int>(m.free_dofs.size()));
    CHECK((m.A - m.A.transpose()).norm() <= 1e-12 * m.A.norm());
    CHECK(m.D.maxCoeff() < 0.0);
  }
}

TEST_CASE("zero load has the trivial solution") {
  ContactProblem prob = make_problem(ExperimentOptions{});
  prob.bodies[0].load = {};
  const Discretization disc(prob);
  for (Variant v : kVariants) {
    const MixedSolution s = solve_mixed(disc, full_config(v, 1));
    CHECK(s.u.norm() == 0.0);
    CHECK(max_abs(s.lambda) == 0.0);
    CHECK(check_vi_residual(disc, full_config(v, 1), s.u, s.lambda) == 0.0);
  }
}

TEST_CASE("oracle multipliers are the positive part of l_h") {
  for (Experiment e : {Experiment::Pressing, Experiment::Bending}) {
    ExperimentOptions o;
    o.experiment = e;
    o.degree = 1;
    const Discretization disc(make_problem(o));
    for (Variant v : kVariants) {
      const NitscheConfig cfg = full_config(v, 1);
      const MixedSolution s = solve_mixed(disc, cfg);
      CHECK(s.enumerated);
      const auto lh = reconstruct_lambda(disc, cfg, s.u);
      for (std::size_t q = 0; q < lh.size(); ++q) {
        CHECK(s.lambda[q] == doctest::Approx(lh[q]).epsilon(1e-9).scale(max_abs(lh)));
      }
      CHECK(check_vi_residual(disc, cfg, s.u, s.lambda) <= 1e-10 * std::max(1.0, max_abs(lh)));
    }
  }
}

TEST_CASE("active set iteration agrees with enumeration") {
  ExperimentOptions o;
  o.experiment = Experiment::Bending;
  o.degree = 2;
  const Discretization disc(make_problem(o));
  for (Variant v : kVariants) {
    const NitscheConfig cfg = full_config(v, 2);
    const MixedSolution a = solve_mixed(disc, cfg, 16);
    const MixedSolution b = solve_mixed(disc, cfg, 0);
    CHECK(a.enumerated);
    CHECK_FALSE(b.enumerated);
    CHECK(a.active == b.active);
    CHECK(energy(disc, a.u - b.u) <= 1e-10 * energy(disc, a.u));
  }
}

TEST_CASE("nitsche solve matches the mixed oracle on random instances") {
  std::mt19937 rng(20261014);
  int count = 0, mixed_patterns = 0;
  for (int i = 0; i < 24; ++i) {
    const SmallInstance inst = random_small_instance(rng, i);
    const Discretization disc(inst.problem);
    for (Variant v : kVariants) {
      CAPTURE(inst.description);
      CAPTURE(to_string(v));
      const NitscheConfig cfg = full_config(v, inst.problem.degree);
      const MixedSolution ref = solve_mixed(disc, cfg);
      const SolveResult sol = solve(disc, cfg);
      const double scale = energy(disc, ref.u);
      const double err = energy(disc, sol.u - ref.u);
      if (scale > 0.0) {
        CHECK(err <= 1e-8 * scale);
      } else {
        CHECK(err == 0.0);
      }
      const double lscale = std::max(1.0, max_abs(ref.lambda));
      for (std::size_t q = 0; q < ref.lambda.size(); ++q) {
        CHECK(std::abs(sol.lambda[q] - ref.lambda[q]) <= 1e-8 * lscale);
      }
      const auto n = std::count(ref.active.begin(), ref.active.end(), 1);
      mixed_patterns += n > 0 && n < static_cast<long>(ref.active.size());
      ++count;
    }
  }
  CHECK(count >= 20);
  // the sample must exercise partial contact, not only the trivial patterns
  CHECK(mixed_patterns >= 10);
}

TEST_CASE("variational inequality residual detects perturbations") {
  ExperimentOptions o;
  o.experiment = Experiment::Bending;
  const Discretization disc(make_problem(o));
  const NitscheConfig cfg = full_config(Variant::Juntunen, 1);
  const MixedSolution s = solve_mixed(disc, cfg);
  const double base = check_vi_residual(disc, cfg, s.u, s.lambda);
  CHECK(base <= 1e-12);
  const auto q = static_cast<std::size_t>(
      std::find(s.active.begin(), s.active.end(), 1) - s.active.begin());
  REQUIRE(q < s.active.size());
  std::vector<double> bumped = s.lambda;
  bumped[q] += 1e-3;
  // the residual is kappa-weighted, so a bump registers only at the kappa scale
  CHECK(check_vi_residual(disc, cfg, s.u, bumped) > 1e3 * std::max(base, 1e-15));
  std::vector<double> negative = s.lambda;
  for (std::size_t k = 0; k < negative.size(); ++k) {
    if (!s.active[k]) negative[k] = -1e-3;
  }
  REQUIRE(std::count(s.active.begin(), s.active.end(), 0) > 0);
  CHECK(check_vi_residual(disc, cfg, s.u, negative) >= 1e-3);
  std::vector<double> lifted = s.lambda;
  for (std::size_t k = 0; k < lifted.size(); ++k) {
    if (!s.active[k]) lifted[k] += 1.0;
  }
  CHECK(check_vi_residual(disc, cfg, s.u, lifted) > 0.0);
  Vector moved = s.u;
  moved *= 1.5;
  CHECK(check_vi_residual(disc, cfg, moved, s.lambda) > 1e-6);
  CHECK_THROWS_AS(check_vi_residual(disc, cfg, s.u, std::vector<double>(2)), ArgumentError);
}
