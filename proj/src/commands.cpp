#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <CLI11.hpp>

#include "nitsche/cli_io.hpp"
#include "nitsche/oracle.hpp"

namespace nitsche {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

fs::path prepare_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_history(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iteration,changed,update\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    os << i + 1 << ',' << history[i].changed << ',' << format_double(history[i].update) << '\n';
  }
}

std::string describe(const StudyConfig& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s p=%d variant=%s alpha=%g", to_string(s.setup.experiment),
                s.setup.degree, to_string(s.variant), s.solver_config().alpha);
  return buf;
}

double energy(const Discretization& disc, const Vector& u) {
  return std::sqrt(std::max(0.0, u.dot(disc.stiffness() * u)));
}

class Verdicts {
 public:
  explicit Verdicts(std::ostream& out) : out_(out) {}

  void report(const std::string& name, bool pass, const std::string& detail) {
    out_ << (pass ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    failed_ += !pass;
  }
  int failed() const { return failed_; }

 private:
  std::ostream& out_;
  int failed_ = 0;
};

std::string value_text(const char* label, double v) { return std::string(label) + "=" + format_double(v); }

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.study.validate();
  const NitscheConfig scfg = cfg.study.solver_config();
  const Discretization disc(make_problem(cfg.study.setup));
  const fs::path dir = prepare_dir(cfg);
  SolveResult sol;
  try {
    sol = solve(disc, scfg);
  } catch (const NonConvergenceError& e) {
    const fs::path log = dir / "iterations.log";
    auto os = open_output(log);
    write_history(os, e.history());
    err << "error: " << e.what() << " (iteration history in " << log.string() << ")\n";
    return 1;
  }
  const EstimatorReport report = estimate(disc, scfg, sol);
  {
    auto os = open_output(dir / "iterations.log");
    write_history(os, sol.history);
  }
  if (cfg.vtk) {
    auto os = open_output(dir / "field.vtk");
    write_vtk(os, disc, sol.u);
  }
  if (cfg.csv) {
    auto os = open_output(dir / "lambda_profile.csv");
    write_lambda_profile(os, disc, scfg, sol);
  }
  {
    auto os = open_output(dir / "estimator.json");
    write_estimator_summary(os, disc, scfg, sol, report);
  }
  if (cfg.svg) {
    auto os = open_output(dir / "mesh.svg");
    write_mesh_svg(os, disc.space(0).mesh(), disc.space(1).mesh(), &report);
  }
  const auto active = std::count(sol.active.begin(), sol.active.end(), 1);
  out << describe(cfg.study) << '\n';
  out << "N " << disc.num_dofs() << "  iterations " << sol.iterations << "  active " << active
      << "/" << sol.active.size() << '\n';
  out << "eta " << format_double(report.eta) << "  S " << format_double(report.S) << '\n';
  out << "output in " << dir.string() << '\n';
  return 0;
}

int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.study.validate();
  const fs::path dir = prepare_dir(cfg);
  out << describe(cfg.study) << " mode=" << to_string(cfg.study.mode) << '\n';
  out << "step        N          eta            S  iters\n";
  auto progress = [&](const ConvergenceRecord& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%4d %8d %12.5e %12.5e %6d\n", r.step, r.N, r.eta, r.S,
                  r.iterations);
    out << buf << std::flush;
  };
  auto write_table = [&](const std::vector<ConvergenceRecord>& records) {
    if (cfg.csv) {
      auto os = open_output(dir / "convergence.csv");
      write_convergence_csv(os, records);
    }
    if (cfg.svg) {
      auto os = open_output(dir / "convergence.svg");
      write_convergence_svg(os, records);
    }
  };
  StudyResult r;
  try {
    r = run_study(cfg.study, progress);
  } catch (const StudyError& e) {
    write_table(e.records());
    err << "error: " << e.what() << " (" << e.records().size() << " steps written to "
        << dir.string() << ")\n";
    return 1;
  }
  write_table(r.records);
  for (int b = 0; b < 2; ++b) {
    auto os = open_output(dir / ("mesh_body" + std::to_string(b + 1) + ".txt"));
    write_mesh_ascii(os, *r.final_problem.bodies[b].mesh);
  }
  if (cfg.svg) {
    auto os = open_output(dir / "mesh.svg");
    write_mesh_svg(os, *r.final_problem.bodies[0].mesh, *r.final_problem.bodies[1].mesh,
                   &r.final_report);
  }
  if (r.records.size() >= 2) {
    out << "slope " << format_double(regression_slope(r.records)) << '\n';
  }
  if (r.records.size() >= 3) {
    out << "window_slope " << format_double(window_slope(r.records)) << '\n';
  }
  out << "output in " << dir.string() << '\n';
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  Verdicts v(out);
  const Variant variants[] = {Variant::Weighted, Variant::MasterSlave, Variant::Juntunen};

  for (int p : {1, 2}) {
    ExperimentOptions o;
    o.experiment = Experiment::Patch;
    o.degree = p;
    const Discretization disc(make_problem(o));
    const PatchSolution exact = patch_solution(o);
    for (Variant var : variants) {
      NitscheConfig nc;
      nc.variant = var;
      nc.alpha = default_alpha(p);
      const SolveResult sol = solve(disc, nc);
      double worst = 0.0, scale = 0.0;
      for (int b = 0; b < 2; ++b) {
        const FeSpace& sp = disc.space(b);
        const Vector ub = disc.body_coefficients(sol.u, b);
        for (int n = 0; n < sp.num_nodes(); ++n) {
          const Vec2 d = exact.displacement(b, sp.node_position(n));
          const Vec2 h(ub[FeSpace::dof(n, 0)], ub[FeSpace::dof(n, 1)]);
          worst = std::max(worst, (d - h).norm());
          scale = std::max(scale, d.norm());
        }
      }
      const double rel = worst / scale;
      v.report(std::string("patch_test p=") + std::to_string(p) + " " + to_string(var),
               rel < 1e-10, value_text("relative_error", rel));
    }
  }

  {
    std::mt19937 rng(20261014);
    int agree = 0, total = 0;
    double worst_u = 0.0, worst_l = 0.0;
    for (int i = 0; i < cfg.verify_instances; ++i) {
      const SmallInstance inst = random_small_instance(rng, i);
      const Discretization disc(inst.problem);
      for (Variant var : variants) {
        NitscheConfig nc;
        nc.variant = var;
        nc.alpha = default_alpha(inst.problem.degree);
        nc.drop_inactive_terms = false;
        const MixedSolution ref = solve_mixed(disc, nc);
        const SolveResult sol = solve(disc, nc);
        const double scale = energy(disc, ref.u);
        const double eu = scale > 0.0 ? energy(disc, sol.u - ref.u) / scale
                                       : energy(disc, sol.u - ref.u);
        double lscale = 1.0, el = 0.0;
        for (double l : ref.lambda) lscale = std::max(lscale, std::abs(l));
        for (std::size_t q = 0; q < ref.lambda.size(); ++q) {
          el = std::max(el, std::abs(sol.lambda[q] - ref.lambda[q]) / lscale);
        }
        worst_u = std::max(worst_u, eu), worst_l = std::max(worst_l, el);
        agree += eu <= 1e-8 && el <= 1e-8;
        ++total;
      }
    }
    v.report("oracle_agreement", agree == total,
             std::to_string(agree) + "/" + std::to_string(total) + " " +
                 value_text("energy_error", worst_u) + " " + value_text("lambda_error", worst_l));
  }

  {
    StudyConfig sc = cfg.study;
    sc.validate();
    NitscheConfig nc = sc.solver_config();
    const Discretization disc(make_problem(sc.setup));
    const SolveResult sol = solve(disc, nc);
    const std::vector<double> lambda =
        reconstruct_lambda(disc, nc, sol.u, !cfg.unclamped_lambda);
    const std::string where = describe(sc);

    const double lmin = *std::min_element(lambda.begin(), lambda.end());
    v.report("multiplier_nonnegative", lmin >= 0.0, where + " " + value_text("min_lambda", lmin));

    int mismatch = 0;
    for (std::size_t q = 0; q < lambda.size(); ++q) {
      mismatch += (sol.active[q] != 0) != (lambda[q] > 0.0);
    }
    v.report("active_iff_positive", mismatch == 0,
             std::to_string(mismatch) + " mismatched points");

    const SparseMatrix k = disc.stiffness() + assemble_nitsche(disc, nc, sol.active);
    const SparseMatrix kt = k.transpose();
    const double asym = (k - kt).norm() / k.norm();
    v.report("system_symmetric", asym <= 1e-12, value_text("relative_asymmetry", asym));

    const EstimatorReport rep = estimate(disc, nc, sol);
    double agg = 0.0;
    for (const auto& a : rep.aggregate) {
      for (double x : a) agg += x;
    }
    const double parts = rep.eta_squared();
    const double add = std::abs(agg - parts) / std::max(parts, 1e-300);
    const double eta_gap = std::abs(rep.eta * rep.eta - parts) / std::max(parts, 1e-300);
    v.report("estimator_additive", add <= 1e-12 && eta_gap <= 1e-12,
             value_text("aggregate_gap", add) + " " + value_text("eta_gap", eta_gap));

    nc.drop_inactive_terms = false;
    const SolveResult full = solve(disc, nc);
    const std::vector<double> lfull = reconstruct_lambda(disc, nc, full.u, !cfg.unclamped_lambda);
    double lscale = 1.0;
    for (double l : lfull) lscale = std::max(lscale, std::abs(l));
    const double vi = check_vi_residual(disc, nc, full.u, lfull);
    v.report("vi_residual", vi <= 1e-10 * lscale, value_text("residual", vi));
  }

  out << (v.failed() == 0 ? "all checks passed" : std::to_string(v.failed()) + " checks failed")
      << '\n';
  return v.failed() == 0 ? 0 : 1;
}

int cmd_mesh_dump(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const ContactProblem prob = make_problem(cfg.study.setup);
  const fs::path dir = prepare_dir(cfg);
  for (int b = 0; b < 2; ++b) {
    const fs::path path = dir / ("mesh_body" + std::to_string(b + 1) + ".txt");
    auto os = open_output(path);
    write_mesh_ascii(os, *prob.bodies[b].mesh);
    out << "body " << b + 1 << ": " << prob.bodies[b].mesh->num_vertices() << " vertices, "
        << prob.bodies[b].mesh->num_triangles() << " triangles -> " << path.string() << '\n';
  }
  if (cfg.svg) {
    auto os = open_output(dir / "mesh.svg");
    write_mesh_svg(os, *prob.bodies[0].mesh, *prob.bodies[1].mesh);
  }
  out << "N " << count_dofs(*prob.bodies[0].mesh, prob.degree) +
                     count_dofs(*prob.bodies[1].mesh, prob.degree)
      << " (p=" << prob.degree << ")\n";
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Two-body frictionless contact with Nitsche's method", "nitsche_contact");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  bool unclamped = false, keep_inactive = false, cold_start = false;
  app.add_option("--config", config_path, "key = value file applied before the flags");
  const char* keys[][2] = {
      {"experiment", "pressing, bending, cosine or patch"},
      {"degree", "polynomial degree, 1 or 2"},
      {"variant", "weighted, master-slave or juntunen"},
      {"alpha", "stabilisation parameter (default by degree)"},
      {"mode", "uniform or adaptive"},
      {"theta", "Doerfler bulk parameter"},
      {"max-dofs", "stop before exceeding this many dofs"},
      {"max-steps", "maximum refinement steps"},
      {"e1", "Young's modulus of body 1"},
      {"e2", "Young's modulus of body 2"},
      {"nu", "Poisson ratio of both bodies"},
      {"out", "output directory"},
  };
  for (const auto& k : keys) {
    app.add_option(std::string("--") + k[0], values[k[0]], k[1]);
  }
  app.add_option("--set", sets, "extra key=value settings")->take_all();
  app.add_flag("--unclamped-lambda", unclamped, "verify: use raw l_h instead of its positive part");
  app.add_flag("--keep-inactive-terms", keep_inactive, "keep stabilisation on the inactive set");
  app.add_flag("--cold-start", cold_start, "start every study solve from full contact");

  CLI::App* solve_cmd = app.add_subcommand("solve", "single solve on the initial mesh");
  CLI::App* study_cmd = app.add_subcommand("study", "refinement study");
  CLI::App* verify_cmd = app.add_subcommand("verify", "patch test, oracle battery and invariants");
  CLI::App* dump_cmd = app.add_subcommand("mesh-dump", "write the initial meshes");

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) read_config_file(config_path, cfg);
    for (const auto& k : keys) {
      if (app.count(std::string("--") + k[0]) > 0) apply_setting(cfg, k[0], values[k[0]]);
    }
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (unclamped) cfg.unclamped_lambda = true;
    if (keep_inactive) cfg.study.drop_inactive_terms = false;
    if (cold_start) cfg.study.warm_start = false;
    cfg.study.validate();
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg, out, err);
    if (study_cmd->parsed()) return cmd_study(cfg, out, err);
    if (verify_cmd->parsed()) return cmd_verify(cfg, out, err);
    if (dump_cmd->parsed()) return cmd_mesh_dump(cfg, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace nitsche
