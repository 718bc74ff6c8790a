#include "nitsche/experiments.hpp"

#include <cmath>
#include <numbers>

namespace nitsche {

namespace {

constexpr double kTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) < kTol; }

const Rect kBody1{0.5, 0.25, 1.0, 0.75};
const Rect kBody2{1.0, 0.0, 1.6, 1.0};
const Rect kPatchBody2{1.0, 0.25, 1.6, 0.75};

BoundaryRule rule(std::string name, FacetTag tag, unsigned comps,
                  std::function<bool(const Vec2&)> f) {
  return {std::move(name), tag, comps, std::move(f)};
}

bool on_interface(const Vec2& x) { return near(x.x(), 1.0) && x.y() > 0.25 && x.y() < 0.75; }

BoundarySpec block_spec(double dirichlet_x, unsigned comps) {
  BoundarySpec s;
  s.rules.push_back(rule("dirichlet", FacetTag::Dirichlet, comps,
                         [dirichlet_x](const Vec2& x) { return near(x.x(), dirichlet_x); }));
  s.rules.push_back(rule("contact", FacetTag::Contact, kNoComponent, on_interface));
  s.rules.push_back(rule("free", FacetTag::Neumann, kNoComponent, [dirichlet_x](const Vec2& x) {
    return !near(x.x(), dirichlet_x) && !on_interface(x);
  }));
  return s;
}

BoundarySpec patch_spec(bool first) {
  BoundarySpec s;
  if (first) {
    s.rules.push_back(rule("left", FacetTag::Dirichlet, kComponentX,
                           [](const Vec2& x) { return near(x.x(), 0.5); }));
  }
  s.rules.push_back(rule("bottom", FacetTag::Dirichlet, kComponentY, [](const Vec2& x) {
    return near(x.y(), 0.25) && !near(x.x(), 0.5) && !near(x.x(), 1.0) && !near(x.x(), 1.6);
  }));
  s.rules.push_back(rule("contact", FacetTag::Contact, kNoComponent, on_interface));
  s.rules.push_back(rule("free", FacetTag::Neumann, kNoComponent, [first](const Vec2& x) {
    const bool left = first && near(x.x(), 0.5);
    const bool bottom = near(x.y(), 0.25) && !near(x.x(), 0.5) && !near(x.x(), 1.0) &&
                        !near(x.x(), 1.6);
    return !left && !bottom && !on_interface(x);
  }));
  return s;
}

// Body 2 needs vertices at the ends of the interface, otherwise its contact
// facets would not cover it.
void check_interface_cover(const Mesh& mesh) {
  double length = 0.0;
  for (int f : mesh.facets_with_tag(FacetTag::Contact)) length += mesh.facet_length(f);
  if (std::abs(length - 0.5) > 1e-9) {
    throw ArgumentError("mesh resolution leaves part of the interface uncovered on body " +
                        std::to_string(mesh.body_id()) + " (choose ny2 divisible by 4)");
  }
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Pressing: return "pressing";
    case Experiment::Bending: return "bending";
    case Experiment::Cosine: return "cosine";
    case Experiment::Patch: return "patch";
  }
  return "?";
}

std::vector<std::string> experiment_ids() { return {"pressing", "bending", "cosine", "patch"}; }

Experiment parse_experiment(const std::string& id) {
  for (Experiment e : {Experiment::Pressing, Experiment::Bending, Experiment::Cosine,
                       Experiment::Patch}) {
    if (id == to_string(e)) return e;
  }
  throw ArgumentError("unknown experiment '" + id +
                      "' (valid: pressing, bending, cosine, patch)");
}

MeshResolution default_resolution(Experiment e) {
  // Even row counts keep the cosine meshes mirror symmetric about y = 0.5.
  if (e == Experiment::Cosine) return {6, 6, 4, 8};
  return {3, 3, 4, 4};
}

double default_alpha(int degree) { return degree == 1 ? 1e-2 : 1e-3; }

ContactProblem make_problem(const ExperimentOptions& opt) {
  MeshResolution res = opt.resolution;
  if (res.nx1 <= 0 || res.ny1 <= 0 || res.nx2 <= 0 || res.ny2 <= 0) {
    res = default_resolution(opt.experiment);
  }
  const DiagonalPattern pattern =
      opt.experiment == Experiment::Cosine ? DiagonalPattern::MirrorY : DiagonalPattern::Uniform;

  ContactProblem p;
  p.degree = opt.degree;
  Body& b1 = p.bodies[0];
  Body& b2 = p.bodies[1];
  b1.material = MaterialParams::from_young(opt.E1, opt.nu);
  b2.material = MaterialParams::from_young(opt.E2, opt.nu);

  if (opt.experiment == Experiment::Patch) {
    b1.mesh = std::make_shared<const Mesh>(
        classify_boundary(generate_block_mesh(kBody1, res.nx1, res.ny1, 1), patch_spec(true)));
    b2.mesh = std::make_shared<const Mesh>(classify_boundary(
        generate_block_mesh(kPatchBody2, res.nx2, res.ny2, 2), patch_spec(false)));
    check_interface_cover(*b1.mesh);
    check_interface_cover(*b2.mesh);
    const double pr = opt.patch_pressure;
    const TractionField g = [pr](const Vec2&, const Vec2& n) { return Vec2(-pr * n.x(), 0.0); };
    b1.traction = g;
    b2.traction = g;
    return p;
  }

  const unsigned comps = opt.experiment == Experiment::Bending ? kComponentXY : kComponentX;
  b1.mesh = std::make_shared<const Mesh>(classify_boundary(
      generate_block_mesh(kBody1, res.nx1, res.ny1, 1, pattern), block_spec(0.5, comps)));
  b2.mesh = std::make_shared<const Mesh>(classify_boundary(
      generate_block_mesh(kBody2, res.nx2, res.ny2, 2, pattern), block_spec(1.6, comps)));
  check_interface_cover(*b1.mesh);
  check_interface_cover(*b2.mesh);
  if (comps == kComponentX) {
    // Removes the vertical rigid translation left free by the roller supports.
    b1.pins.push_back({Vec2(0.5, 0.25), kComponentY});
    b2.pins.push_back({Vec2(1.6, 0.0), kComponentY});
  }
  switch (opt.experiment) {
    case Experiment::Pressing:
      b1.load = [](const Vec2& x) { return Vec2(x.x() - 0.5, 0.0); };
      break;
    case Experiment::Bending:
      b1.load = [](const Vec2&) { return Vec2(0.0, -0.05); };
      break;
    case Experiment::Cosine:
      b1.load = [](const Vec2& x) {
        return Vec2(-std::cos(4.0 * std::numbers::pi * (x.y() - 0.5)), 0.0);
      };
      break;
    default:
      break;
  }
  return p;
}

ContactProblem with_meshes(const ContactProblem& problem, Mesh body1, Mesh body2) {
  ContactProblem p = problem;
  p.bodies[0].mesh = std::make_shared<const Mesh>(std::move(body1));
  p.bodies[1].mesh = std::make_shared<const Mesh>(std::move(body2));
  return p;
}

Mat2 PatchSolution::strain(int body) const {
  const MaterialParams& m = body == 0 ? m1 : m2;
  Mat2 e = Mat2::Zero();
  e(0, 0) = -pressure * (1.0 - m.nu * m.nu) / m.E;
  e(1, 1) = pressure * m.nu * (1.0 + m.nu) / m.E;
  return e;
}

Vec2 PatchSolution::displacement(int body, const Vec2& x) const {
  const Mat2 e1 = strain(0);
  if (body == 0) return Vec2(e1(0, 0) * (x.x() - 0.5), e1(1, 1) * (x.y() - 0.25));
  const Mat2 e2 = strain(1);
  return Vec2(e2(0, 0) * (x.x() - 1.0) + 0.5 * e1(0, 0), e2(1, 1) * (x.y() - 0.25));
}

PatchSolution patch_solution(const ExperimentOptions& opt) {
  return {MaterialParams::from_young(opt.E1, opt.nu), MaterialParams::from_young(opt.E2, opt.nu),
          opt.patch_pressure};
}

}  // namespace nitsche
