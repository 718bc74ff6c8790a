#include "nitsche/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace nitsche {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number '" + value + "' for " + key);
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    throw ConfigError("invalid integer '" + value + "' for " + key);
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = normalise_key(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

template <class F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalise_key(trim(raw_key));
  const std::string value = trim(raw_value);
  StudyConfig& s = cfg.study;
  ExperimentOptions& o = s.setup;
  if (key == "experiment") {
    o.experiment = rethrow_as_config([&] { return parse_experiment(value); });
  } else if (key == "degree") {
    o.degree = parse_int(key, value);
    if (o.degree != 1 && o.degree != 2) throw ConfigError("degree must be 1 or 2");
  } else if (key == "variant") {
    s.variant = rethrow_as_config([&] { return parse_variant(value); });
  } else if (key == "alpha") {
    s.alpha = parse_double(key, value);
    if (!(s.alpha > 0.0)) throw ConfigError("alpha must be positive");
  } else if (key == "mode") {
    s.mode = rethrow_as_config([&] { return parse_mode(value); });
  } else if (key == "theta") {
    s.theta = parse_double(key, value);
    if (!(s.theta > 0.0 && s.theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  } else if (key == "max-dofs") {
    s.max_dofs = parse_int(key, value);
  } else if (key == "max-steps") {
    s.max_steps = parse_int(key, value);
  } else if (key == "e1" || key == "e2") {
    const double e = parse_double(key, value);
    if (!(e > 0.0)) throw ConfigError(key + " must be positive");
    (key == "e1" ? o.E1 : o.E2) = e;
  } else if (key == "nu") {
    o.nu = parse_double(key, value);
    if (!(o.nu > -1.0 && o.nu <= 0.45)) throw ConfigError("nu must lie in (-1, 0.45]");
  } else if (key == "nx1" || key == "ny1" || key == "nx2" || key == "ny2") {
    const int n = parse_int(key, value);
    if (n < 1) throw ConfigError(key + " must be at least 1");
    MeshResolution& r = o.resolution;
    if (r.nx1 <= 0 || r.ny1 <= 0 || r.nx2 <= 0 || r.ny2 <= 0) r = default_resolution(o.experiment);
    (key == "nx1" ? r.nx1 : key == "ny1" ? r.ny1 : key == "nx2" ? r.nx2 : r.ny2) = n;
  } else if (key == "patch-pressure") {
    o.patch_pressure = parse_double(key, value);
  } else if (key == "out") {
    if (value.empty()) throw ConfigError("out must not be empty");
    cfg.out_dir = value;
  } else if (key == "csv") {
    cfg.csv = parse_bool(key, value);
  } else if (key == "vtk") {
    cfg.vtk = parse_bool(key, value);
  } else if (key == "svg") {
    cfg.svg = parse_bool(key, value);
  } else if (key == "drop-inactive-terms") {
    s.drop_inactive_terms = parse_bool(key, value);
  } else if (key == "warm-start") {
    s.warm_start = parse_bool(key, value);
  } else if (key == "unclamped-lambda") {
    cfg.unclamped_lambda = parse_bool(key, value);
  } else if (key == "verify-instances") {
    cfg.verify_instances = parse_int(key, value);
  } else {
    throw ConfigError("unknown setting '" + raw_key + "'");
  }
}

void read_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    apply_setting(cfg, t.substr(0, eq), t.substr(eq + 1));
  }
}

void read_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  read_config(in, cfg);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records) {
  os << "step,N,eta,S,eta_plus_S,iters\n";
  for (const auto& r : records) {
    os << r.step << ',' << r.N << ',' << format_double(r.eta) << ',' << format_double(r.S) << ','
       << format_double(r.eta_plus_S) << ',' << r.iterations << '\n';
  }
}

std::vector<ConvergenceRecord> read_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "step,N,eta,S,eta_plus_S,iters") {
    throw ConfigError("not a convergence table");
  }
  std::vector<ConvergenceRecord> out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
    if (f.size() != 6) throw ConfigError("malformed convergence row '" + line + "'");
    ConvergenceRecord r;
    r.step = parse_int("step", f[0]);
    r.N = parse_int("N", f[1]);
    r.eta = parse_double("eta", f[2]);
    r.S = parse_double("S", f[3]);
    r.eta_plus_S = parse_double("eta_plus_S", f[4]);
    r.iterations = parse_int("iters", f[5]);
    out.push_back(r);
  }
  return out;
}

namespace {

constexpr double kPlotW = 640, kPlotH = 480, kMargin = 70;

struct LogAxis {
  double lo, hi;  // decades
  double map(double v, double a, double b) const { return a + (std::log10(v) - lo) / (hi - lo) * (b - a); }
};

LogAxis decades(double vmin, double vmax) {
  LogAxis a{std::floor(std::log10(vmin)), std::ceil(std::log10(vmax))};
  if (a.hi <= a.lo) a.hi = a.lo + 1;
  return a;
}

}  // namespace

void write_convergence_svg(std::ostream& os, const std::vector<ConvergenceRecord>& records) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotW << "\" height=\"" << kPlotH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::vector<const ConvergenceRecord*> pts;
  for (const auto& r : records) {
    if (r.N > 0 && r.eta_plus_S > 0.0) pts.push_back(&r);
  }
  if (pts.empty()) {
    os << "<text x=\"20\" y=\"40\">no data</text>\n</svg>\n";
    return;
  }
  double nmin = pts.front()->N, nmax = nmin, emin = pts.front()->eta_plus_S, emax = emin;
  for (const auto* r : pts) {
    nmin = std::min<double>(nmin, r->N), nmax = std::max<double>(nmax, r->N);
    emin = std::min(emin, r->eta_plus_S), emax = std::max(emax, r->eta_plus_S);
  }
  const LogAxis ax = decades(nmin, nmax), ay = decades(emin, emax);
  const double x0 = kMargin, x1 = kPlotW - 20, y0 = kPlotH - kMargin, y1 = 20;
  os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
     << y0 - y1 << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = ax.lo; d <= ax.hi; d += 1) {
    const double x = ax.map(std::pow(10.0, d), x0, x1);
    os << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\"" << y1
       << "\" stroke=\"#ddd\"/><text x=\"" << x << "\" y=\"" << y0 + 18
       << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = ay.lo; d <= ay.hi; d += 1) {
    const double y = ay.map(std::pow(10.0, d), y0, y1);
    os << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/><text x=\"" << x0 - 6 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kPlotH - 20
     << "\" text-anchor=\"middle\">N</text>\n";
  os << "<text x=\"18\" y=\"" << (y0 + y1) / 2 << "\" transform=\"rotate(-90 18 " << (y0 + y1) / 2
     << ")\" text-anchor=\"middle\">eta + S</text>\n";
  for (const auto* r : pts) {
    os << "<circle cx=\"" << ax.map(r->N, x0, x1) << "\" cy=\"" << ay.map(r->eta_plus_S, y0, y1)
       << "\" r=\"3.5\" fill=\"#c03\"/>\n";
  }
  if (pts.size() >= 2 && nmax > nmin) {
    std::vector<double> n, v;
    for (const auto* r : pts) n.push_back(r->N), v.push_back(r->eta_plus_S);
    const double slope = regression_slope(n, v);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n.size(); ++i) mx += std::log10(n[i]), my += std::log10(v[i]);
    mx /= n.size(), my /= n.size();
    auto fit = [&](double N) { return std::pow(10.0, my + slope * (std::log10(N) - mx)); };
    os << "<line x1=\"" << ax.map(nmin, x0, x1) << "\" y1=\"" << ay.map(fit(nmin), y0, y1)
       << "\" x2=\"" << ax.map(nmax, x0, x1) << "\" y2=\"" << ay.map(fit(nmax), y0, y1)
       << "\" stroke=\"#036\" stroke-dasharray=\"6 4\"/>\n";
    os << "<text x=\"" << x1 - 10 << "\" y=\"" << y1 + 20 << "\" text-anchor=\"end\">slope "
       << std::fixed << std::setprecision(3) << slope << std::defaultfloat << "</text>\n";
  }
  os << "</svg>\n";
}

void write_mesh_svg(std::ostream& os, const Mesh& body1, const Mesh& body2,
                    const EstimatorReport* report) {
  const std::array<const Mesh*, 2> meshes = {&body1, &body2};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Mesh* m : meshes) {
    for (const Vec2& v : m->vertices()) {
      xmin = std::min(xmin, v.x()), xmax = std::max(xmax, v.x());
      ymin = std::min(ymin, v.y()), ymax = std::max(ymax, v.y());
    }
  }
  const double scale = 600.0 / std::max(xmax - xmin, ymax - ymin);
  const double w = (xmax - xmin) * scale + 20, h = (ymax - ymin) * scale + 20;
  auto px = [&](const Vec2& v) {
    std::ostringstream s;
    s << 10 + (v.x() - xmin) * scale << ',' << 10 + (ymax - v.y()) * scale;
    return s.str();
  };
  double lmin = 0, lmax = 0;
  bool have = false;
  if (report) {
    for (const auto& a : report->aggregate) {
      for (double x : a) {
        if (x <= 0) continue;
        const double l = std::log10(x);
        lmin = have ? std::min(lmin, l) : l, lmax = have ? std::max(lmax, l) : l;
        have = true;
      }
    }
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int b = 0; b < 2; ++b) {
    const Mesh& m = *meshes[b];
    for (int t = 0; t < m.num_triangles(); ++t) {
      std::string fill = b == 0 ? "#e8eef8" : "#f4f4ec";
      if (have && t < static_cast<int>(report->aggregate[b].size())) {
        const double x = report->aggregate[b][t];
        const double s = x > 0 && lmax > lmin ? (std::log10(x) - lmin) / (lmax - lmin) : 0.0;
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * s),
                      static_cast<int>(80 + 100 * (1 - s)), static_cast<int>(255 * (1 - s)));
        fill = buf;
      }
      const auto& tri = m.triangles()[t];
      os << "<polygon points=\"" << px(m.vertex(tri[0])) << ' ' << px(m.vertex(tri[1])) << ' '
         << px(m.vertex(tri[2])) << "\" fill=\"" << fill
         << "\" stroke=\"#333\" stroke-width=\"0.4\"/>\n";
    }
    for (int f : m.facets_with_tag(FacetTag::Contact)) {
      const auto& e = m.facets()[f];
      const Vec2 a = m.vertex(e.vertices[0]), c = m.vertex(e.vertices[1]);
      const std::string pa = px(a), pc = px(c);
      os << "<polyline points=\"" << pa << ' ' << pc << "\" stroke=\"#c03\" stroke-width=\"2\"/>\n";
    }
  }
  os << "</svg>\n";
}

void write_vtk(std::ostream& os, const Discretization& disc, const Vector& u) {
  std::vector<Vec2> points;
  std::vector<Vec2> disp;
  std::vector<std::array<int, 3>> cells;
  std::vector<double> vm;
  std::vector<int> body_id;
  for (int b = 0; b < 2; ++b) {
    const FeSpace& sp = disc.space(b);
    const Mesh& mesh = sp.mesh();
    const Vector ub = disc.body_coefficients(u, b);
    const FieldFunction field(disc.space_ptr(b), ub);
    const int base = static_cast<int>(points.size());
    for (int n = 0; n < sp.num_nodes(); ++n) {
      points.push_back(sp.node_position(n));
      disp.emplace_back(ub[FeSpace::dof(n, 0)], ub[FeSpace::dof(n, 1)]);
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto nd = sp.element_nodes(t);
      std::vector<std::array<int, 3>> sub;
      if (sp.degree() == 1) {
        sub.push_back({nd[0], nd[1], nd[2]});
      } else {
        // local node 3 + e is the midpoint of edge (v_e, v_{e+1})
        sub = {{nd[0], nd[3], nd[5]}, {nd[3], nd[1], nd[4]}, {nd[5], nd[4], nd[2]},
               {nd[3], nd[4], nd[5]}};
      }
      const ElementMap map = ElementMap::of(mesh, t);
      for (const auto& s : sub) {
        const Vec2 c = (sp.node_position(s[0]) + sp.node_position(s[1]) + sp.node_position(s[2])) / 3.0;
        vm.push_back(von_mises(disc.material(b), strain(field, t, map.to_reference(c))));
        cells.push_back({base + s[0], base + s[1], base + s[2]});
        body_id.push_back(b + 1);
      }
    }
  }
  os << "# vtk DataFile Version 3.0\ntwo-body contact solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << points.size() << " double\n";
  for (const Vec2& p : points) os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  os << "CELLS " << cells.size() << ' ' << 4 * cells.size() << '\n';
  for (const auto& c : cells) os << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  os << "CELL_TYPES " << cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) os << "5\n";
  os << "POINT_DATA " << points.size() << "\nVECTORS displacement double\n";
  for (const Vec2& d : disp) os << format_double(d.x()) << ' ' << format_double(d.y()) << " 0\n";
  os << "CELL_DATA " << cells.size() << "\nSCALARS von_mises double 1\nLOOKUP_TABLE default\n";
  for (double v : vm) os << format_double(v) << '\n';
  os << "SCALARS body int 1\nLOOKUP_TABLE default\n";
  for (int b : body_id) os << b << '\n';
}

void write_lambda_profile(std::ostream& os, const Discretization& disc, const NitscheConfig& cfg,
                          const SolveResult& sol) {
  const auto raw = reconstruct_lambda(disc, cfg, sol.u, false);
  std::vector<int> order(disc.points().size());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = static_cast<int>(q);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return disc.points()[a].x.y() < disc.points()[b].x.y();
  });
  os << "y,lambda,lh,active,segment\n";
  for (int q : order) {
    os << format_double(disc.points()[q].x.y()) << ',' << format_double(sol.lambda[q]) << ','
       << format_double(raw[q]) << ',' << (sol.active[q] ? 1 : 0) << ','
       << disc.points()[q].segment << '\n';
  }
}

void write_estimator_summary(std::ostream& os, const Discretization& disc,
                             const NitscheConfig& cfg, const SolveResult& sol,
                             const EstimatorReport& report) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(cfg.variant);
  j["alpha"] = cfg.alpha;
  j["degree"] = disc.degree();
  j["dofs"] = disc.num_dofs();
  j["iterations"] = sol.iterations;
  int active = 0;
  for (char a : sol.active) active += a != 0;
  j["interface_points"] = disc.points().size();
  j["active_points"] = active;
  j["eta"] = report.eta;
  j["S"] = report.S;
  j["eta_plus_S"] = report.eta + report.S;
  j["element"] = report.element_total;
  j["interior"] = report.interior_total;
  j["contact"] = report.contact_total;
  j["neumann"] = report.neumann_total;
  j["oscillation"] = report.oscillation_total;
  double force = 0.0;
  for (std::size_t q = 0; q < sol.lambda.size(); ++q) force += disc.points()[q].weight * sol.lambda[q];
  j["contact_force"] = force;
  os << j.dump(2) << '\n';
}

}  // namespace nitsche
