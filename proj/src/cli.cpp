#include "meanfield/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "meanfield/analysis.hpp"
#include "meanfield/bubbles.hpp"
#include "meanfield/error.hpp"
#include "meanfield/expr.hpp"
#include "meanfield/functional.hpp"
#include "meanfield/linalg.hpp"
#include "meanfield/mesh.hpp"
#include "meanfield/report.hpp"
#include "meanfield/solver.hpp"

namespace meanfield {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"seed", "output", "threads", "svg"}},
      {"domain",
       {"kind", "n_radial", "n_angular", "r_inner", "center_spacing", "boundary_spacing", "max_spacing", "growth",
        "path"}},
      {"potentials", {"K", "h"}},
      {"params", {"rho", "rho_prime"}},
      {"solver",
       {"max_iters", "grad_tol", "armijo_c", "backtrack_factor", "initial_step", "min_step", "cg_tol",
        "cg_max_iters"}},
      {"init", {"kind", "field", "noise"}},
      {"diagnostics", {"threshold", "radius"}},
      {"bubble", {"points", "lambdas", "lambda", "separation"}},
      {"sweep", {"points", "warm_start"}},
      {"classify", {"points", "genus", "boundary_components"}},
      {"mt", {"probe", "rho", "eps", "J", "K"}},
      {"profile", {"kind", "lambdas", "a", "c", "s0", "center", "samples", "step"}},
  };
  return keys;
}

// Deterministic uniform draws on [lo, hi) from the top 53 bits.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  double operator()(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 gen_;
};

struct Context {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 0;
  int threads = 1;
  bool svg = true;
};

SurfaceMesh build_mesh(const Config& cfg) {
  const std::string kind = cfg.get_string("domain", "kind", "disk");
  const MeshResolution res{cfg.get_int("domain", "n_radial", 32), cfg.get_int("domain", "n_angular", 128)};
  if (kind == "disk") return build_disk_mesh(res);
  if (kind == "annulus") return build_annulus_mesh(cfg.get_double("domain", "r_inner", 0.5), res);
  if (kind == "refined_disk") {
    RefinedDiskSpec spec;
    spec.center_spacing = cfg.get_double("domain", "center_spacing", spec.center_spacing);
    spec.boundary_spacing = cfg.get_double("domain", "boundary_spacing", spec.boundary_spacing);
    spec.max_spacing = cfg.get_double("domain", "max_spacing", spec.max_spacing);
    spec.growth = cfg.get_double("domain", "growth", spec.growth);
    return build_refined_disk_mesh(spec);
  }
  if (kind == "file") {
    const fs::path path = cfg.require_string("domain", "path");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read mesh file " + path.string());
    return read_mesh_dump(in, DomainTag{DomainKind::disk, 0.0});
  }
  throw ConfigError("domain.kind must be disk, annulus, refined_disk or file, got '" + kind + "'");
}

Potentials build_potentials(const Config& cfg, const SurfaceMesh& mesh) {
  const Expr K = Expr::parse(cfg.get_string("potentials", "K", "1"));
  const Expr h = Expr::parse(cfg.get_string("potentials", "h", "1"));
  return sample_potentials(mesh, K, h);
}

Params build_params(const Config& cfg) {
  return {cfg.get_double("params", "rho", kPi), cfg.get_double("params", "rho_prime", 0.0)};
}

SolverConfig build_solver(const Config& cfg) {
  SolverConfig s;
  s.max_iters = cfg.get_int("solver", "max_iters", s.max_iters);
  s.grad_tol = cfg.get_double("solver", "grad_tol", s.grad_tol);
  s.armijo_c = cfg.get_double("solver", "armijo_c", s.armijo_c);
  s.backtrack_factor = cfg.get_double("solver", "backtrack_factor", s.backtrack_factor);
  s.initial_step = cfg.get_double("solver", "initial_step", s.initial_step);
  s.min_step = cfg.get_double("solver", "min_step", s.min_step);
  s.cg_tol = cfg.get_double("solver", "cg_tol", s.cg_tol);
  s.cg_max_iters = cfg.get_int("solver", "cg_max_iters", s.cg_max_iters);
  try {
    s.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("[solver] ") + e.what());
  }
  return s;
}

// "placement x y weight; ..." records.
BubbleConfig build_bubbles(const Config& cfg) {
  BubbleConfig b;
  const std::string spec = cfg.get_string("bubble", "points", "interior 0 0 1");
  for (const auto& record : split_list(spec, ';')) {
    std::istringstream in(record);
    std::string placement;
    std::string xs, ys, ws;
    in >> placement >> xs >> ys >> ws;
    if (ws.empty()) throw ConfigError("bubble.points record '" + record + "' needs: placement x y weight");
    BubblePoint p;
    if (placement == "interior") {
      p.placement = Placement::interior;
    } else if (placement == "boundary") {
      p.placement = Placement::boundary;
    } else {
      throw ConfigError("bubble placement must be interior or boundary, got '" + placement + "'");
    }
    p.location = {parse_constant(xs, "bubble.points x"), parse_constant(ys, "bubble.points y")};
    p.weight = parse_constant(ws, "bubble.points weight");
    b.points.push_back(p);
  }
  b.separation = cfg.get_double("bubble", "separation", b.separation);
  b.lambda = cfg.get_double("bubble", "lambda", 1.0);
  return b;
}

std::vector<double> bubble_lambdas(const Config& cfg) {
  std::vector<double> lambdas = cfg.get_list("bubble", "lambdas", {8.0, 16.0, 32.0});
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw ConfigError("bubble.lambdas must be strictly increasing");
  }
  return lambdas;
}

// "rho, rho_prime; ..." records.
std::vector<Params> parameter_points(const Config& cfg, const std::string& section) {
  std::vector<Params> grid;
  for (const auto& record : split_list(cfg.require_string(section, "points"), ';')) {
    const auto parts = split_list(record, ',');
    if (parts.size() != 2) throw ConfigError(section + ".points record '" + record + "' needs: rho, rho_prime");
    grid.push_back({parse_constant(parts[0], section + ".points rho"),
                    parse_constant(parts[1], section + ".points rho_prime")});
  }
  if (grid.empty()) throw ConfigError(section + ".points is empty");
  return grid;
}

Json fields_csv_and_svg(const Context& ctx, const SurfaceMesh& mesh, const Field& u, const std::string& stem) {
  CsvWriter csv(ctx.out / (stem + ".csv"), {"vertex", "x", "y", "value"});
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& p = mesh.vertices()[v];
    csv.row({std::to_string(v), format_number(p.x), format_number(p.y), format_number(u[v])});
  }
  csv.close();
  Json files = Json::array({stem + ".csv"});
  if (ctx.svg) {
    write_svg_heatmap(mesh, u, ctx.out / (stem + ".svg"));
    files.push_back(stem + ".svg");
  }
  return files;
}

Json run_solve(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  const Potentials pot = build_potentials(ctx.cfg, mesh);
  const Params p = build_params(ctx.cfg);
  const SolverConfig scfg = build_solver(ctx.cfg);
  Uniform uniform(ctx.seed);

  Field init;
  const std::string init_kind = ctx.cfg.get_string("init", "kind", "expr");
  if (init_kind == "expr") {
    init = sample(Expr::parse(ctx.cfg.get_string("init", "field", "0")), mesh, false);
  } else if (init_kind == "bubble") {
    init = bubble_field(mesh, build_bubbles(ctx.cfg)).u;
  } else {
    throw ConfigError("init.kind must be expr or bubble, got '" + init_kind + "'");
  }
  const double noise = ctx.cfg.get_double("init", "noise", 0.0);
  if (noise != 0.0) {
    for (int v = 0; v < mesh.num_vertices(); ++v) init[v] += uniform(-noise, noise);
  }

  const MinimizeResult result = minimize(mesh, pot, p, scfg, init);
  write_history_csv(result.report, ctx.out / "history.csv");
  const Field& u = result.u;

  // Directional derivative at the initial field against a central difference
  // along a seeded direction.
  Field dir(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) dir[v] = uniform(-1.0, 1.0);
  constexpr double kStep = 1e-5;
  const double analytic = gradient(mesh, pot, p, init).dot(dir);
  const Field up = init + kStep * dir;
  const Field down = init - kStep * dir;
  const double fd = (energy(mesh, pot, p, up).total - energy(mesh, pot, p, down).total) / (2.0 * kStep);

  const ConcentrationPair pair = concentration(mesh, pot, p, u);
  const double threshold = ctx.cfg.get_double("diagnostics", "threshold", 5.0);
  const double radius = ctx.cfg.get_double("diagnostics", "radius", 0.2);
  Eigen::Index peak = 0;
  u.maxCoeff(&peak);
  Json singular = Json::array();
  for (const auto& s : detect_singular_set(mesh, u, threshold)) {
    singular.push_back(Json{{"vertex", s.vertex},
                            {"placement", s.on_boundary ? "boundary" : "interior"},
                            {"value", s.value}});
  }

  Json files = Json::array({"history.csv"});
  for (auto& f : fields_csv_and_svg(ctx, mesh, u, "solution")) files.push_back(f);
  if (ctx.svg) {
    const Field density = pair.interior_measure.cwiseQuotient(mesh.vertex_area());
    write_svg_heatmap(mesh, density, ctx.out / "concentration.svg");
    files.push_back("concentration.svg");
  }

  return Json{{"mesh", mesh_summary(mesh)},
              {"params", Json{{"rho", p.rho}, {"rho_prime", p.rho_prime}}},
              {"classification", to_json(classify(p.rho, p.rho_prime, topology_of(mesh)))},
              {"solve", to_json(result.report)},
              {"diagnostics",
               Json{{"gradient_check",
                     Json{{"at", "initial field"},
                          {"directional_derivative", analytic},
                          {"central_difference", fd},
                          {"relative_error", std::abs(analytic - fd) / std::max(1e-300, std::abs(analytic))}}},
                    {"field_max", u.maxCoeff()},
                    {"field_min", u.minCoeff()},
                    {"interior_mass", pair.interior_measure.sum()},
                    {"boundary_mass", pair.boundary_measure.sum()},
                    {"local_mass_at_peak",
                     local_mass(mesh, pair, p, mesh.vertices()[static_cast<int>(peak)], radius)},
                    {"local_mass_radius", radius},
                    {"quasisharp_ratio", quasisharp_ratio(mesh, pot, u)},
                    {"singular_threshold", threshold},
                    {"singular_set", singular}}},
              {"files", files}};
}

Json run_sweep(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  const Potentials pot = build_potentials(ctx.cfg, mesh);
  const SolverConfig scfg = build_solver(ctx.cfg);
  const std::vector<Params> grid = parameter_points(ctx.cfg, "sweep");
  SweepOptions options;
  options.warm_start = ctx.cfg.get_bool("sweep", "warm_start", true);
  options.threads = ctx.threads;
  const auto entries = continuation_sweep(mesh, pot, grid, scfg, options);

  CsvWriter csv(ctx.out / "sweep.csv", {"rho", "rho_prime", "N", "M", "region", "existence", "coercive",
                                        "on_critical_set", "converged", "iterations", "energy", "residual",
                                        "error"});
  Json rows = Json::array();
  for (const auto& e : entries) {
    const auto& c = e.classification;
    Json row{{"rho", e.params.rho},
             {"rho_prime", e.params.rho_prime},
             {"classification", to_json(c)},
             {"coercive", e.coercive},
             {"on_critical_set", e.on_critical_set}};
    if (e.report) {
      row["solve"] = to_json(*e.report);
    } else {
      row["error"] = e.error;
    }
    rows.push_back(row);
    csv.row({format_number(e.params.rho), format_number(e.params.rho_prime), std::to_string(c.N),
             std::to_string(c.M), to_string(c.region), to_string(c.existence), e.coercive ? "true" : "false",
             e.on_critical_set ? "true" : "false", e.report && e.report->converged ? "true" : "false",
             e.report ? std::to_string(e.report->iterations) : "",
             e.report ? format_number(e.report->final_energy.total) : "",
             e.report ? format_number(e.report->residual) : "", e.error});
  }
  csv.close();
  return Json{{"mesh", mesh_summary(mesh)},
              {"warm_start", options.warm_start},
              {"points", rows},
              {"files", Json::array({"sweep.csv"})}};
}

Json run_classify(const Context& ctx) {
  SurfaceTopology topo;
  topo.genus = ctx.cfg.get_int("classify", "genus", 0);
  topo.boundary_components = ctx.cfg.get_int("classify", "boundary_components", 1);
  topo.simply_connected = topo.genus == 0 && topo.boundary_components == 1;
  const std::vector<Params> grid = parameter_points(ctx.cfg, "classify");
  CsvWriter csv(ctx.out / "classify.csv",
                {"rho", "rho_prime", "N", "M", "region", "existence", "on_critical_set"});
  Json rows = Json::array();
  for (const auto& p : grid) {
    const ParamClass c = classify(p.rho, p.rho_prime, topo);
    Json row{{"rho", p.rho}, {"rho_prime", p.rho_prime}};
    row.update(to_json(c));
    rows.push_back(row);
    csv.row({format_number(p.rho), format_number(p.rho_prime), std::to_string(c.N), std::to_string(c.M),
             to_string(c.region), to_string(c.existence), c.on_critical_set ? "true" : "false"});
  }
  csv.close();
  return Json{{"topology", to_json(topo)}, {"points", rows}, {"files", Json::array({"classify.csv"})}};
}

Json run_bubble(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  const Potentials pot = build_potentials(ctx.cfg, mesh);
  const Params p = build_params(ctx.cfg);
  const BubbleConfig base = build_bubbles(ctx.cfg);
  const std::vector<double> lambdas = bubble_lambdas(ctx.cfg);
  const AsymptoticsResult r = energy_asymptotics(mesh, base, lambdas, pot, p);

  CsvWriter csv(ctx.out / "asymptotics.csv", {"lambda", "dirichlet", "log_interior", "log_boundary", "integral",
                                              "energy", "under_resolved"});
  for (const auto& s : r.samples) {
    csv.row({format_number(s.lambda), format_number(s.dirichlet), format_number(s.log_interior),
             format_number(s.log_boundary), format_number(s.integral), format_number(s.energy),
             s.under_resolved ? "true" : "false"});
  }
  csv.close();
  Json files = Json::array({"asymptotics.csv"});
  if (ctx.svg) {
    BubbleConfig last = base;
    last.lambda = lambdas.back();
    write_svg_heatmap(mesh, bubble_field(mesh, last).u, ctx.out / "bubble.svg");
    files.push_back("bubble.svg");
  }
  return Json{{"mesh", mesh_summary(mesh)},
              {"params", Json{{"rho", p.rho}, {"rho_prime", p.rho_prime}}},
              {"interior_points", base.interior_count()},
              {"boundary_points", base.boundary_count()},
              {"fits",
               Json{{"dirichlet", to_json(r.dirichlet)},
                    {"log_interior", to_json(r.log_interior)},
                    {"log_boundary", to_json(r.log_boundary)},
                    {"integral", to_json(r.integral)},
                    {"energy", to_json(r.energy)}}},
              {"predicted", to_json(r.predicted)},
              {"predicted_derived", r.predicted_derived},
              {"under_resolved", r.any_under_resolved},
              {"files", files}};
}

Json run_mt_check(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  const BubbleConfig base = build_bubbles(ctx.cfg);
  const std::vector<double> lambdas = bubble_lambdas(ctx.cfg);
  const std::string probe = ctx.cfg.get_string("mt", "probe", "mt");
  const double rho = ctx.cfg.get_double("mt", "rho", 2.0);
  const double eps = ctx.cfg.get_double("mt", "eps", 0.01);
  const int J = ctx.cfg.get_int("mt", "J", 1);
  const int K = ctx.cfg.get_int("mt", "K", 0);
  if (probe != "mt" && probe != "trace" && probe != "improved") {
    throw ConfigError("mt.probe must be mt, trace or improved, got '" + probe + "'");
  }

  CsvWriter csv(ctx.out / "deficits.csv", {"lambda", "deficit", "dirichlet", "rest", "under_resolved"});
  std::vector<double> xs, ys;
  std::vector<ImprovedMtTerms> terms;
  bool under_resolved = false;
  for (double lambda : lambdas) {
    BubbleConfig cfg = base;
    cfg.lambda = lambda;
    const BubbleField f = bubble_field(mesh, cfg);
    under_resolved = under_resolved || f.under_resolved;
    double value = 0.0;
    std::string dcell, rcell;
    if (probe == "mt") {
      value = mt_deficit(mesh, rho, f.u);
    } else if (probe == "trace") {
      value = trace_deficit(mesh, eps, f.u);
    } else {
      const ImprovedMtTerms t = improved_mt_terms(mesh, J, K, f.u);
      terms.push_back(t);
      value = t.value();
      dcell = format_number(t.dirichlet);
      rcell = format_number(t.rest);
    }
    xs.push_back(std::log(lambda));
    ys.push_back(value);
    csv.row({format_number(lambda), format_number(value), dcell, rcell, f.under_resolved ? "true" : "false"});
  }
  csv.close();

  Json result{{"mesh", mesh_summary(mesh)}, {"probe", probe}};
  if (probe == "mt") result["rho"] = rho;
  if (probe == "trace") result["eps"] = eps;
  if (probe == "improved") {
    result["J"] = J;
    result["K"] = K;
    result["required_dirichlet_factor"] = required_dirichlet_factor(terms);
  }
  result["values"] = ys;
  result["min"] = *std::min_element(ys.begin(), ys.end());
  if (xs.size() >= 3) result["fit"] = to_json(slope_fit(xs, ys));
  result["under_resolved"] = under_resolved;
  result["files"] = Json::array({"deficits.csv"});
  return result;
}

Json run_phi(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  const Params p = build_params(ctx.cfg);
  const SolverConfig scfg = build_solver(ctx.cfg);
  const Field phi = solve_phi(mesh, p.rho_prime, scfg.cg());
  Json result{{"mesh", mesh_summary(mesh)},
              {"rho_prime", p.rho_prime},
              {"min", phi.minCoeff()},
              {"max", phi.maxCoeff()},
              {"mean", mean(mesh, phi)}};
  if (mesh.domain().kind == DomainKind::disk) {
    double err = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Point& q = mesh.vertices()[v];
      const double exact = p.rho_prime / (2.0 * kPi) * (q.x * q.x + q.y * q.y - 0.5);
      err = std::max(err, std::abs(phi[v] - exact));
    }
    result["closed_form"] = "(rho'/(2 pi)) (r^2 - 1/2)";
    result["max_error"] = err;
  }
  result["files"] = fields_csv_and_svg(ctx, mesh, phi, "phi");
  return result;
}

Json run_mesh_info(const Context& ctx) {
  const SurfaceMesh mesh = build_mesh(ctx.cfg);
  std::ostringstream dump;
  write_mesh_dump(mesh, dump);
  write_text_file(ctx.out / "mesh.txt", dump.str());
  return Json{{"mesh", mesh_summary(mesh)}, {"files", Json::array({"mesh.txt"})}};
}

Json run_profile_check(const Context& ctx) {
  const std::string kind = ctx.cfg.get_string("profile", "kind", "liouville");
  const std::vector<double> lambdas = ctx.cfg.get_list("profile", "lambdas", {0.5, 1.0, 4.0});
  const int samples = ctx.cfg.get_int("profile", "samples", 100);
  const double step = ctx.cfg.get_double("profile", "step", 1e-3);
  if (samples < 1 || !(step > 0.0)) throw ConfigError("profile.samples and profile.step must be positive");
  Uniform uniform(ctx.seed);
  Json rows = Json::array();

  if (kind == "liouville") {
    const std::vector<double> c = ctx.cfg.get_list("profile", "center", {0.0, 0.0});
    if (c.size() != 2) throw ConfigError("profile.center needs two coordinates");
    CsvWriter csv(ctx.out / "profile.csv", {"lambda", "total_mass", "mass_error", "max_interior_residual"});
    for (double lambda : lambdas) {
      const LiouvilleProfile prof(lambda, {c[0], c[1]});
      const double mass = prof.total_mass();
      double res = 0.0;
      for (int k = 0; k < samples; ++k) {
        const Point x{c[0] + uniform(-3.0, 3.0) / lambda, c[1] + uniform(-3.0, 3.0) / lambda};
        res = std::max(res, std::abs(interior_fd_residual(prof, x, step)));
      }
      rows.push_back(Json{{"lambda", lambda},
                          {"total_mass", mass},
                          {"mass_error", std::abs(mass - 8.0 * kPi)},
                          {"max_interior_residual", res}});
      csv.row({format_number(lambda), format_number(mass), format_number(std::abs(mass - 8.0 * kPi)),
               format_number(res)});
    }
    csv.close();
  } else if (kind == "zhang") {
    const double a = ctx.cfg.require_double("profile", "a");
    const double cc = ctx.cfg.require_double("profile", "c");
    const double s0 = ctx.cfg.get_double("profile", "s0", 0.0);
    CsvWriter csv(ctx.out / "profile.csv", {"lambda", "interior_mass", "boundary_mass", "quantization",
                                            "max_interior_residual", "max_boundary_residual"});
    for (double lambda : lambdas) {
      const ZhangProfile prof(a, cc, lambda, s0);
      double res_in = 0.0;
      double res_bd = 0.0;
      for (int k = 0; k < samples; ++k) {
        const Point x{s0 + uniform(-3.0, 3.0) / lambda, 2.0 * step + uniform(0.0, 3.0) / lambda};
        res_in = std::max(res_in, std::abs(interior_fd_residual(prof, x, step)));
        res_bd = std::max(res_bd, std::abs(boundary_fd_residual(prof, s0 + uniform(-3.0, 3.0) / lambda, step)));
      }
      const double im = prof.interior_mass();
      const double bm = prof.boundary_mass();
      const double q = a * im + cc * bm;
      rows.push_back(Json{{"lambda", lambda},
                          {"center", Json::array({prof.center().x, prof.center().y})},
                          {"min_denominator", prof.min_denominator()},
                          {"interior_mass", im},
                          {"boundary_mass", bm},
                          {"quantization", q},
                          {"quantization_error", std::abs(q - 4.0 * kPi)},
                          {"max_interior_residual", res_in},
                          {"max_boundary_residual", res_bd}});
      csv.row({format_number(lambda), format_number(im), format_number(bm), format_number(q), format_number(res_in),
               format_number(res_bd)});
    }
    csv.close();
  } else {
    throw ConfigError("profile.kind must be liouville or zhang, got '" + kind + "'");
  }
  return Json{{"kind", kind}, {"step", step}, {"samples", samples}, {"profiles", rows},
              {"files", Json::array({"profile.csv"})}};
}

void print_error(std::ostream& out, const std::string& kind, const std::string& message,
                 const std::optional<std::string>& path = std::nullopt) {
  Json err{{"kind", kind}, {"message", message}};
  if (path) err["path"] = *path;
  out << Json{{"error", err}}.dump() << '\n';
}

}  // namespace

Config resolve_config(const CliOptions& options) {
  if (!fs::exists(options.config)) throw ConfigError("config file not found: " + options.config.string());
  Config cfg = Config::load(options.config);
  for (const auto& o : options.overrides) cfg.apply_override(o);
  if (options.seed) cfg.set("run", "seed", std::to_string(*options.seed));
  if (options.out) cfg.set("run", "output", options.out->string());
  for (const auto& [section, keys] : cfg.sections()) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }
  return cfg;
}

int run(const CliOptions& options, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx;
  try {
    ctx.cfg = resolve_config(options);
    ctx.out = ctx.cfg.get_string("run", "output", "out");
    const double seed = ctx.cfg.get_double("run", "seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) throw ConfigError("run.seed must be a non-negative integer");
    ctx.seed = static_cast<std::uint64_t>(seed);
    ctx.svg = ctx.cfg.get_bool("run", "svg", true);
    ctx.threads = ctx.cfg.get_int("run", "threads", 1);
    if (const char* env = std::getenv("MEANFIELD_LAB_THREADS"); env && !options.threads) {
      ctx.threads = static_cast<int>(parse_constant(env, "MEANFIELD_LAB_THREADS"));
    }
    if (options.threads) ctx.threads = *options.threads;
    if (ctx.threads < 1) throw ConfigError("thread count must be at least 1");
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) throw ConfigError("output directory not writable: " + ctx.out.string());
  } catch (const ConfigError& e) {
    print_error(out, e.kind(), e.what(), options.config.string());
    return 2;
  } catch (const Error& e) {
    // Expression errors inside constant values are config errors too.
    print_error(out, "config", e.what(), options.config.string());
    return 2;
  }

  // The echo leaves out where the artifacts go and how many threads ran;
  // neither changes the numbers.
  Config echo = ctx.cfg;
  echo.erase("run", "output");
  echo.erase("run", "threads");

  try {
    Json result;
    const std::string& sub = options.subcommand;
    if (sub == "solve") {
      result = run_solve(ctx);
    } else if (sub == "sweep") {
      result = run_sweep(ctx);
    } else if (sub == "bubble") {
      result = run_bubble(ctx);
    } else if (sub == "mt-check") {
      result = run_mt_check(ctx);
    } else if (sub == "phi") {
      result = run_phi(ctx);
    } else if (sub == "classify") {
      result = run_classify(ctx);
    } else if (sub == "mesh-info") {
      result = run_mesh_info(ctx);
    } else if (sub == "profile-check") {
      result = run_profile_check(ctx);
    } else {
      throw ConfigError("unknown subcommand '" + sub + "'");
    }

    Json config = Json::object();
    for (const auto& [section, keys] : echo.sections()) {
      Json s = Json::object();
      for (const auto& [key, value] : keys) s[key] = value;
      config[section] = s;
    }
    Json report{{"tool", kToolName},
                {"version", kToolVersion},
                {"subcommand", sub},
                {"config_hash", echo.content_hash()},
                {"seed", ctx.seed},
                {"config", config},
                {"result", result}};
    write_text_file(ctx.out / "report.json", report.dump(2) + "\n");
    write_text_file(ctx.out / "config.echo.ini", echo.canonical_echo());
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(ctx.out / "timing.json", Json{{"wall_time_seconds", wall}, {"threads", ctx.threads}}.dump(2) + "\n");
    out << Json{{"status", "ok"}, {"subcommand", sub}, {"report", (ctx.out / "report.json").string()}}.dump()
        << '\n';
    return 0;
  } catch (const ConfigError& e) {
    print_error(out, e.kind(), e.what(), options.config.string());
    return 2;
  } catch (const Error& e) {
    print_error(out, e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(out, "internal", e.what());
    return 1;
  }
}

int run_cli(int argc, char** argv, std::ostream& out) {
  CLI::App app{"Mean field equation lab: solves, probes and classifies the Liouville-type problem"};
  app.set_version_flag("--version", std::string(kToolVersion));
  CliOptions options;
  std::string out_dir;
  long long seed = 0;
  int threads = 0;
  app.add_option("subcommand", options.subcommand, "one of: solve, sweep, bubble, mt-check, phi, classify, "
                                                   "mesh-info, profile-check")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", options.config, "run config file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides run.output)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized probes (overrides run.seed)")
                       ->check(CLI::NonNegativeNumber);
  app.add_option("--override", options.overrides, "section.key=value, repeatable");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(out, "config", e.what());
    return 2;
  }
  if (*out_opt) options.out = out_dir;
  if (*seed_opt) options.seed = seed;
  if (*threads_opt) options.threads = threads;
  return run(options, out);
}

}  // namespace meanfield
