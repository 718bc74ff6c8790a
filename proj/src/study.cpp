#include "nitsche/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <numeric>
#include <thread>

namespace nitsche {

const char* to_string(RefinementMode m) {
  return m == RefinementMode::Uniform ? "uniform" : "adaptive";
}

RefinementMode parse_mode(const std::string& name) {
  if (name == "uniform") return RefinementMode::Uniform;
  if (name == "adaptive") return RefinementMode::Adaptive;
  throw ArgumentError("unknown refinement mode '" + name + "' (valid: uniform, adaptive)");
}

NitscheConfig StudyConfig::solver_config() const {
  NitscheConfig c;
  c.variant = variant;
  c.alpha = alpha > 0.0 ? alpha : default_alpha(setup.degree);
  c.drop_inactive_terms = drop_inactive_terms;
  return c;
}

void StudyConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw ArgumentError("theta must lie in (0, 1)");
  if (setup.degree != 1 && setup.degree != 2) throw ArgumentError("degree must be 1 or 2");
  if (alpha < 0.0) throw ArgumentError("alpha must be positive");
  if (max_steps < 1) throw ArgumentError("max_steps must be at least 1");
}

std::vector<int> mark_dorfler(std::span<const double> indicators, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ArgumentError("theta must lie in (0, 1)");
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return indicators[a] > indicators[b]; });
  const double total = std::accumulate(indicators.begin(), indicators.end(), 0.0);
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  double sum = 0.0;
  for (int i : order) {
    marked.push_back(i);
    sum += indicators[i];
    if (sum >= theta * total) break;
  }
  return marked;
}

std::array<std::vector<int>, 2> mark_dorfler(const EstimatorReport& report, double theta) {
  std::vector<double> all = report.aggregate[0];
  all.insert(all.end(), report.aggregate[1].begin(), report.aggregate[1].end());
  const int n1 = static_cast<int>(report.aggregate[0].size());
  std::array<std::vector<int>, 2> out;
  for (int i : mark_dorfler(all, theta)) {
    if (i < n1) {
      out[0].push_back(i);
    } else {
      out[1].push_back(i - n1);
    }
  }
  return out;
}

int count_dofs(const Mesh& mesh, int degree) {
  return 2 * (mesh.num_vertices() + (degree == 2 ? mesh.num_facets() : 0));
}

StudyResult run_study(const StudyConfig& cfg, const StudyObserver& observer) {
  cfg.validate();
  const NitscheConfig solver = cfg.solver_config();
  const int p = cfg.setup.degree;
  ContactProblem problem = make_problem(cfg.setup);
  const int initial = count_dofs(*problem.bodies[0].mesh, p) + count_dofs(*problem.bodies[1].mesh, p);
  if (cfg.max_dofs <= initial) {
    throw ArgumentError("max_dofs must exceed the initial dof count " + std::to_string(initial));
  }

  StudyResult out;
  std::unique_ptr<Discretization> previous;
  std::vector<char> previous_active;
  for (int step = 0; step < cfg.max_steps; ++step) {
    auto current = std::make_unique<Discretization>(problem);
    const Discretization& disc = *current;
    SolveResult sol;
    try {
      if (previous && cfg.warm_start) {
        const std::vector<char> guess = transfer_active_set(*previous, previous_active, disc);
        try {
          sol = solve(disc, solver, &guess);
        } catch (const NonConvergenceError& e) {
          // the transferred set can lead into a cycle; full contact is the reference start
          const int wasted = static_cast<int>(e.history().size());
          sol = solve(disc, solver);
          sol.iterations += wasted;
        }
      } else {
        sol = solve(disc, solver);
      }
    } catch (const std::exception& e) {
      throw StudyError("step " + std::to_string(step) + ": " + e.what(), out.records);
    }
    EstimatorReport report = estimate(disc, solver, sol);

    ConvergenceRecord r;
    r.step = step;
    r.N = disc.num_dofs();
    r.eta = report.eta;
    r.S = report.S;
    r.eta_plus_S = report.eta + report.S;
    r.element = report.element_total;
    r.interior = report.interior_total;
    r.contact = report.contact_total;
    r.neumann = report.neumann_total;
    r.oscillation = report.oscillation_total;
    r.iterations = sol.iterations;
    out.records.push_back(r);
    if (observer) observer(r);

    Mesh m1, m2;
    if (cfg.mode == RefinementMode::Uniform) {
      m1 = refine_uniform(*problem.bodies[0].mesh);
      m2 = refine_uniform(*problem.bodies[1].mesh);
    } else {
      const auto marked = mark_dorfler(report, cfg.theta);
      m1 = bisect_refine(*problem.bodies[0].mesh, marked[0]);
      m2 = bisect_refine(*problem.bodies[1].mesh, marked[1]);
    }
    const bool last = count_dofs(m1, p) + count_dofs(m2, p) > cfg.max_dofs ||
                      step + 1 == cfg.max_steps;
    if (last) {
      out.final_problem = problem;
      out.final_solution = std::move(sol);
      out.final_report = std::move(report);
      break;
    }
    previous_active = sol.active;
    previous = std::move(current);
    problem = with_meshes(problem, std::move(m1), std::move(m2));
  }
  return out;
}

double regression_slope(std::span<const double> N, std::span<const double> value) {
  if (N.size() != value.size() || N.size() < 2) {
    throw ArgumentError("regression needs at least two points");
  }
  const double n = static_cast<double>(N.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < N.size(); ++i) {
    const double x = std::log(N[i]), y = std::log(value[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double d = n * sxx - sx * sx;
  if (d == 0.0) throw ArgumentError("regression needs distinct N values");
  return (n * sxy - sx * sy) / d;
}

double regression_slope(std::span<const ConvergenceRecord> records) {
  std::vector<double> n, v;
  for (const auto& r : records) {
    n.push_back(r.N);
    v.push_back(r.eta_plus_S);
  }
  return regression_slope(n, v);
}

double window_slope(std::span<const ConvergenceRecord> records, std::size_t first) {
  if (records.size() < first + 2) return regression_slope(records);
  return regression_slope(records.subspan(first));
}

int worker_threads() {
  if (const char* env = std::getenv("NITSCHE_CONTACT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<StudyResult> run_studies(const std::vector<StudyConfig>& configs) {
  std::vector<StudyResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_study(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(worker_threads(), static_cast<int>(configs.size()));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace nitsche
