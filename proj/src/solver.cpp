#include "meanfield/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "meanfield/error.hpp"

namespace meanfield {

void SolverConfig::validate() const {
  if (max_iters <= 0 || cg_max_iters <= 0) throw ArgumentError("solver iteration caps must be positive");
  if (!(grad_tol > 0.0) || !(cg_tol > 0.0) || !(initial_step > 0.0) || !(min_step > 0.0)) {
    throw ArgumentError("solver tolerances and steps must be positive");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ArgumentError("armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ArgumentError("backtrack_factor must lie in (0, 1)");
  }
}

namespace {

struct Preconditioner {
  SparseMatrix op;
  Field inverse_diagonal;

  explicit Preconditioner(const SurfaceMesh& mesh)
      : op(sobolev_operator(mesh)), inverse_diagonal(op.diagonal().cwiseInverse()) {}

  CgResult solve(const Field& rhs, const CgConfig& cg, const Field& guess = Field()) const {
    return cg_solve([&](const Field& x, Field& y) { y.noalias() = op * x; }, rhs, cg, inverse_diagonal, guess);
  }
};

}  // namespace

double pde_residual(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u,
                    const CgConfig& cg) {
  const Field g = gradient(mesh, pot, p, u);
  const Preconditioner pre(mesh);
  const Field d = pre.solve(g, cg).x;
  return std::sqrt(std::max(0.0, g.dot(d)));
}

MinimizeResult minimize(const SurfaceMesh& mesh, const Potentials& pot, const Params& p,
                        const SolverConfig& cfg, const Field& init) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Preconditioner pre(mesh);
  const CgConfig cg = cfg.cg();

  MinimizeResult result;
  SolveReport& report = result.report;
  Field u = init;
  remove_mean(mesh, u);
  const EnergyBreakdown current = energy(mesh, pot, p, u);
  if (!std::isfinite(current.total)) throw SolverError("non-finite energy at the initial field");
  report.initial_energy = current;
  // Energy along the iterates, accumulated from the accurate per-step changes.
  double tracked = current.total;

  Field direction;
  for (int iter = 0;; ++iter) {
    const Field g = gradient(mesh, pot, p, u);
    direction = pre.solve(-g, cg, direction).x;
    const double slope = g.dot(direction);  // = -||g||^2 in the H1-dual norm
    const double grad_norm = std::sqrt(std::max(0.0, -slope));
    report.grad_norm_history.push_back(grad_norm);
    report.energy_history.push_back(tracked);
    report.residual = grad_norm;
    if (grad_norm <= cfg.grad_tol) {
      report.converged = true;
      report.message = "converged";
      break;
    }
    if (iter == cfg.max_iters) {
      report.message = "iteration cap reached";
      break;
    }

    double step = cfg.initial_step;
    bool accepted = false;
    double change = 0.0;
    while (step >= cfg.min_step) {
      change = energy_change(mesh, pot, p, u, direction, step);
      if (std::isfinite(change) && change <= cfg.armijo_c * step * slope && change < 0.0) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at iteration " << iter << ": step below " << cfg.min_step
          << ", H1 gradient norm " << grad_norm;
      report.message = msg.str();
      break;
    }
    u += step * direction;
    remove_mean(mesh, u);
    tracked += change;
    report.step_history.push_back(step);
    report.iterations = iter + 1;
  }

  report.final_energy = energy(mesh, pot, p, u);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.u = std::move(u);
  return result;
}

std::vector<SweepEntry> continuation_sweep(const SurfaceMesh& mesh, const Potentials& pot,
                                           const std::vector<Params>& grid, const SolverConfig& cfg,
                                           const SweepOptions& options) {
  if (grid.empty()) throw ArgumentError("continuation sweep needs a non-empty parameter grid");
  const SurfaceTopology topo = topology_of(mesh);
  std::vector<SweepEntry> entries(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    entries[i].params = grid[i];
    entries[i].classification = classify(grid[i].rho, grid[i].rho_prime, topo);
    entries[i].coercive = entries[i].classification.region == Region::coercive;
    entries[i].on_critical_set = entries[i].classification.on_critical_set;
  }

  auto solve_point = [&](std::size_t i, const Field& init) {
    try {
      MinimizeResult r = minimize(mesh, pot, grid[i], cfg, init);
      entries[i].report = std::move(r.report);
      entries[i].solution = std::move(r.u);
    } catch (const Error& e) {
      entries[i].error = e.what();
    }
  };

  const Field zero = Field::Zero(mesh.num_vertices());
  if (options.warm_start) {
    Field init = zero;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      solve_point(i, init);
      if (entries[i].error.empty()) init = entries[i].solution;
    }
    return entries;
  }

  const std::size_t workers = static_cast<std::size_t>(std::max(1, options.threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) solve_point(i, zero);
    return entries;
  }
  // Static round-robin assignment; each entry is written by exactly one worker.
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) solve_point(i, zero);
    });
  }
  for (auto& t : pool) t.join();
  return entries;
}

}  // namespace meanfield
