// Acceptance harness: one PASS/FAIL line per criterion. The exit status counts
// failures outside the --expected-fail list.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nitsche/oracle.hpp"
#include "nitsche/study.hpp"

using namespace nitsche;

namespace {

const Variant kVariants[] = {Variant::Weighted, Variant::MasterSlave, Variant::Juntunen};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double energy(const Discretization& disc, const Vector& u) {
  return std::sqrt(std::max(0.0, u.dot(disc.stiffness() * u)));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Lowest multiplier seen over every converged solve of the run.
double g_min_lambda = 0.0;
int g_solves = 0;

void record_lambda(const std::vector<double>& lambda) {
  for (double l : lambda) g_min_lambda = std::min(g_min_lambda, l);
  ++g_solves;
}

StudyConfig study(Experiment e, int p, RefinementMode mode) {
  StudyConfig c;
  c.setup.experiment = e;
  c.setup.degree = p;
  c.mode = mode;
  c.max_dofs = 15000;
  return c;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome patch_test() {
  const auto t0 = Clock::now();
  double worst_u = 0.0, worst_eta = 0.0;
  for (int p : {1, 2}) {
    ExperimentOptions o;
    o.experiment = Experiment::Patch;
    o.degree = p;
    const Discretization disc(make_problem(o));
    const PatchSolution exact = patch_solution(o);
    Vector ue(disc.num_dofs());
    for (int b = 0; b < 2; ++b) {
      ue.segment(disc.offset(b), disc.space(b).num_dofs()) =
          interpolate(disc.space(b), [&](const Vec2& x) { return exact.displacement(b, x); });
    }
    for (Variant v : kVariants) {
      NitscheConfig cfg;
      cfg.variant = v;
      cfg.alpha = default_alpha(p);
      const SolveResult sol = solve(disc, cfg);
      record_lambda(sol.lambda);
      const EstimatorReport rep = estimate(disc, cfg, sol);
      worst_u = std::max(worst_u, energy(disc, sol.u - ue) / energy(disc, ue));
      worst_eta = std::max(worst_eta, rep.eta);
    }
  }
  const double t = seconds_since(t0);
  return {worst_u < 1e-10 && worst_eta < 1e-10 && t < 1.0,
          "energy error " + fmt("%.2e", worst_u) + ", eta " + fmt("%.2e", worst_eta) + ", " +
              fmt("%.2f", t) + " s"};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937 rng(20261014);
  int count = 0, good = 0, max_segments = 0;
  bool p1 = false, p2 = false;
  double worst_u = 0.0, worst_l = 0.0;
  for (int i = 0; i < 24; ++i) {
    const SmallInstance inst = random_small_instance(rng, i);
    const Discretization disc(inst.problem);
    max_segments = std::max(max_segments, static_cast<int>(disc.segments().size()));
    (inst.problem.degree == 1 ? p1 : p2) = true;
    for (Variant v : kVariants) {
      NitscheConfig cfg;
      cfg.variant = v;
      cfg.alpha = default_alpha(inst.problem.degree);
      cfg.drop_inactive_terms = false;
      const MixedSolution ref = solve_mixed(disc, cfg);
      const SolveResult sol = solve(disc, cfg);
      record_lambda(sol.lambda);
      const double scale = energy(disc, ref.u);
      const double eu = energy(disc, sol.u - ref.u) / (scale > 0.0 ? scale : 1.0);
      double el = 0.0;
      for (std::size_t q = 0; q < ref.lambda.size(); ++q) {
        el = std::max(el, std::abs(sol.lambda[q] - ref.lambda[q]));
      }
      worst_u = std::max(worst_u, eu), worst_l = std::max(worst_l, el);
      good += eu <= 1e-8 && el <= 1e-8;
      ++count;
    }
  }
  const double t = seconds_since(t0);
  const bool pass = good == count && count >= 20 && max_segments <= 12 && p1 && p2 && t < 30.0;
  return {pass, std::to_string(good) + "/" + std::to_string(count) + " agree, energy " +
                    fmt("%.2e", worst_u) + ", lambda " + fmt("%.2e", worst_l) + ", segments <= " +
                    std::to_string(max_segments) + ", " + fmt("%.1f", t) + " s"};
}

double study_slope(const StudyResult& r) { return regression_slope(r.records); }

Outcome pressing_slopes(const std::vector<StudyResult>& runs) {
  const char* names[] = {"uniform p=1", "adaptive p=1", "uniform p=2", "adaptive p=2"};
  const double targets[] = {-0.40, -0.49, -0.49, -0.99};
  bool pass = true;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const double s = study_slope(runs[i]);
    pass = pass && std::abs(s - targets[i]) <= 0.15;
    detail += std::string(i ? "; " : "") + names[i] + " " + fmt("%.3f", s) + " (target " +
              fmt("%.2f", targets[i]) + ", N " + std::to_string(runs[i].records.back().N) + ")";
  }
  return {pass, detail};
}

Outcome bending(const StudyResult& r) {
  const double s = study_slope(r);
  const Discretization disc(r.final_problem);
  const auto& pts = disc.points();
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pts[a].x.y() < pts[b].x.y(); });
  const long active = std::count(r.final_solution.active.begin(), r.final_solution.active.end(), 1);
  // free boundary points: switches of the active flag between neighbours along the interface
  std::vector<Vec2> free_points;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (r.final_solution.active[order[k]] != r.final_solution.active[order[k - 1]]) {
      free_points.push_back(0.5 * (pts[order[k]].x + pts[order[k - 1]].x));
    }
  }
  // upper end of the contact zone, reported for comparison
  double top = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    if (r.final_solution.active[q]) top = std::max(top, pts[q].x.y());
  }
  int near = 0, near_top = 0, total = 0;
  for (const auto& body : r.final_problem.bodies) {
    const Mesh& m = *body.mesh;
    for (int t = 0; t < m.num_triangles(); ++t) {
      ++total;
      near_top += (m.centroid(t) - Vec2(1.0, top)).norm() < 0.1;
      for (const Vec2& f : free_points) {
        if ((m.centroid(t) - f).norm() < 0.1) {
          ++near;
          break;
        }
      }
    }
  }
  const double share = total ? static_cast<double>(near) / total : 0.0;
  const bool proper = active > 0 && active < static_cast<long>(pts.size());
  const bool pass = std::abs(s + 1.0) <= 0.2 && proper && !free_points.empty() && share >= 0.3;
  std::string where;
  for (const Vec2& f : free_points) where += " y=" + fmt("%.3f", f.y());
  return {pass, "slope " + fmt("%.3f", s) + ", active " + std::to_string(active) + "/" +
                    std::to_string(pts.size()) + ", free boundary at" + where + ", " +
                    fmt("%.1f", 100 * share) + "% of triangles within 0.1 (upper contact end y=" +
                    fmt("%.3f", top) + ": " + fmt("%.1f", 100.0 * near_top / total) + "%)"};
}

Outcome material_jump(const StudyResult& stiff, const StudyResult& soft) {
  const double a = study_slope(stiff), b = study_slope(soft);
  return {a <= -0.85 && b <= -0.85, "E2=100 " + fmt("%.3f", a) + ", E2=0.01 " + fmt("%.3f", b)};
}

Outcome alpha_robustness(const std::vector<StudyResult>& runs) {
  std::vector<double> s;
  std::string detail;
  const char* names[] = {"1e-4", "1e-3", "1e-2"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    s.push_back(window_slope(runs[i].records));
    detail += std::string(i ? ", " : "") + "alpha=" + names[i] + " " + fmt("%.3f", s.back());
  }
  const double spread = *std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end());
  return {spread <= 0.2, detail + " (spread " + fmt("%.3f", spread) + ")"};
}

Outcome variant_agreement() {
  ExperimentOptions o;
  ContactProblem prob = make_problem(o);
  Mesh m1 = *prob.bodies[0].mesh, m2 = *prob.bodies[1].mesh;
  for (int k = 0; k < 3; ++k) m1 = refine_uniform(m1), m2 = refine_uniform(m2);
  const Discretization disc(with_meshes(prob, m1, m2));
  std::vector<SolveResult> sols;
  std::vector<double> own;
  for (Variant v : kVariants) {
    NitscheConfig cfg;
    cfg.variant = v;
    cfg.alpha = default_alpha(1);
    sols.push_back(solve(disc, cfg));
    record_lambda(sols.back().lambda);
    own.push_back(estimate(disc, cfg, sols.back()).eta);
  }
  // every solution measured with one estimator isolates the estimator definitions
  NitscheConfig common;
  common.variant = Variant::Juntunen;
  common.alpha = default_alpha(1);
  std::vector<double> shared;
  for (const auto& s : sols) shared.push_back(estimate(disc, common, s.u, s.lambda).eta);
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()) - 1.0;
  };
  const double own_spread = spread(own);
  return {own_spread <= 0.05,
          "N " + std::to_string(disc.num_dofs()) + ", eta W/MS/J " + fmt("%.5e", own[0]) + " " +
              fmt("%.5e", own[1]) + " " + fmt("%.5e", own[2]) + ", spread " +
              fmt("%.1f", 100 * own_spread) + "%; with a common estimator " +
              fmt("%.2f", 100 * spread(shared)) + "%"};
}

Outcome cosine_symmetry() {
  ExperimentOptions o;
  o.experiment = Experiment::Cosine;
  o.degree = 2;
  const ContactProblem base = make_problem(o);
  const Discretization disc(with_meshes(base, refine_uniform(*base.bodies[0].mesh),
                                        refine_uniform(*base.bodies[1].mesh)));
  NitscheConfig cfg;
  cfg.alpha = default_alpha(2);
  const SolveResult sol = solve(disc, cfg);
  record_lambda(sol.lambda);
  const auto& pts = disc.points();
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pts[a].x.y() < pts[b].x.y(); });
  std::vector<int> seg_positive(disc.segments().size(), 0);
  for (std::size_t q = 0; q < pts.size(); ++q) seg_positive[pts[q].segment] |= sol.lambda[q] > 0.0;
  int runs = 0;
  for (std::size_t s = 0; s < seg_positive.size(); ++s) {
    runs += seg_positive[s] && (s == 0 || !seg_positive[s - 1]);
  }
  const double peak = max_abs(sol.lambda);
  double asym = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int a = order[k], b = order[order.size() - 1 - k];
    asym = std::max(asym, std::abs(sol.lambda[a] - sol.lambda[b]));
  }
  const double rel = peak > 0.0 ? asym / peak : 1.0;
  return {runs == 2 && rel < 0.02,
          std::to_string(runs) + " contact intervals, asymmetry " + fmt("%.2e", rel) + " of peak"};
}

Outcome property_suite() {
  std::string fails;
  double worst_sym = 0.0, worst_add = 0.0, worst_hom = 0.0;
  for (Experiment e : {Experiment::Pressing, Experiment::Bending}) {
    for (int p : {1, 2}) {
      ExperimentOptions o;
      o.experiment = e;
      o.degree = p;
      const ContactProblem prob = make_problem(o);
      const Discretization disc(prob);
      for (Variant v : kVariants) {
        NitscheConfig cfg;
        cfg.variant = v;
        cfg.alpha = default_alpha(p);
        const SolveResult sol = solve(disc, cfg);
        record_lambda(sol.lambda);
        for (const bool drop : {true, false}) {
          cfg.drop_inactive_terms = drop;
          const SparseMatrix k = disc.stiffness() + assemble_nitsche(disc, cfg, sol.active);
          const SparseMatrix kt = k.transpose();
          worst_sym = std::max(worst_sym, (k - kt).norm() / k.norm());
        }
        cfg.drop_inactive_terms = true;
        const EstimatorReport rep = estimate(disc, cfg, sol);
        double agg = 0.0;
        for (const auto& a : rep.aggregate) agg = std::accumulate(a.begin(), a.end(), agg);
        worst_add = std::max(worst_add, std::abs(agg - rep.eta_squared()) / rep.eta_squared());
        worst_add = std::max(worst_add, std::abs(rep.eta * rep.eta - rep.eta_squared()) /
                                            rep.eta_squared());
        for (double c : {0.5, 2.0, 10.0}) {
          ContactProblem scaled = prob;
          const VectorField f = prob.bodies[0].load;
          scaled.bodies[0].load = [f, c](const Vec2& x) -> Vec2 { return c * f(x); };
          const Discretization sd(scaled);
          const SolveResult ss = solve(sd, cfg);
          record_lambda(ss.lambda);
          const EstimatorReport sr = estimate(sd, cfg, ss);
          worst_hom = std::max(worst_hom, std::abs(sr.eta - c * rep.eta) / (c * rep.eta));
          worst_hom = std::max(worst_hom, std::abs(sr.S - c * rep.S) / std::max(c * rep.eta, 1e-300));
        }
      }
    }
  }
  // Dörfler prefix against the smallest admissible subset
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  int dorfler_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 10);
    for (double& x : v) x = d(rng) < 0.2 ? 0.0 : d(rng);
    const double theta = 0.05 + 0.9 * d(rng);
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    const std::vector<int> marked = mark_dorfler(v, theta);
    std::size_t best = total > 0.0 ? v.size() : 0;
    for (unsigned mask = 0; total > 0.0 && mask < (1u << v.size()); ++mask) {
      double s = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (mask & (1u << i)) s += v[i], ++n;
      }
      if (s >= theta * total) best = std::min(best, n);
    }
    double s = 0.0;
    for (int i : marked) s += v[i];
    dorfler_bad += marked.size() != best || (total > 0.0 && s < theta * total);
  }
  const bool pass = g_min_lambda >= 0.0 && worst_sym <= 1e-12 && worst_add <= 1e-12 &&
                    dorfler_bad == 0 && worst_hom <= 1e-10;
  return {pass, "min lambda " + fmt("%.1e", g_min_lambda) + " over " + std::to_string(g_solves) +
                    " solves, asymmetry " + fmt("%.1e", worst_sym) + ", additivity " +
                    fmt("%.1e", worst_add) + ", doerfler mismatches " +
                    std::to_string(dorfler_bad) + ", homogeneity " + fmt("%.1e", worst_hom)};
}

void record_studies(const std::vector<StudyResult>& runs) {
  for (const auto& r : runs) record_lambda(r.final_solution.lambda);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<int> expected;
  app.add_option("--expected-fail", expected, "criteria known to fail; reported but not counted");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected_set(expected.begin(), expected.end());

  int unexpected = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s %d %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                !o.pass && expected_set.count(id) ? " [expected]" : "");
    std::fflush(stdout);
    unexpected += !o.pass && !expected_set.count(id);
  };

  report(1, "patch test", patch_test());
  report(2, "oracle equivalence", oracle_equivalence());

  const auto t0 = Clock::now();
  std::vector<StudyConfig> cfgs = {
      study(Experiment::Pressing, 1, RefinementMode::Uniform),
      study(Experiment::Pressing, 1, RefinementMode::Adaptive),
      study(Experiment::Pressing, 2, RefinementMode::Uniform),
      study(Experiment::Pressing, 2, RefinementMode::Adaptive),
      study(Experiment::Bending, 2, RefinementMode::Adaptive),
  };
  for (double e2 : {100.0, 0.01}) {
    cfgs.push_back(study(Experiment::Bending, 2, RefinementMode::Adaptive));
    cfgs.back().setup.E2 = e2;
  }
  for (double alpha : {1e-4, 1e-3, 1e-2}) {
    cfgs.push_back(study(Experiment::Bending, 2, RefinementMode::Adaptive));
    cfgs.back().alpha = alpha;
  }
  const std::vector<StudyResult> runs = run_studies(cfgs);
  record_studies(runs);
  std::printf("(studies finished in %.1f s)\n", seconds_since(t0));

  report(3, "pressing slopes", pressing_slopes({runs.begin(), runs.begin() + 4}));
  report(4, "bending experiment", bending(runs[4]));
  report(5, "material jump", material_jump(runs[5], runs[6]));
  report(6, "alpha robustness", alpha_robustness({runs.begin() + 7, runs.begin() + 10}));
  report(7, "variant agreement", variant_agreement());
  report(8, "cosine symmetry", cosine_symmetry());
  report(9, "property suite", property_suite());
  return unexpected == 0 ? 0 : 1;
}
