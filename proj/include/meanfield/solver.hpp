#pragma once

#include <optional>
#include <string>
#include <vector>

#include "meanfield/analysis.hpp"
#include "meanfield/functional.hpp"
#include "meanfield/linalg.hpp"
#include "meanfield/mesh.hpp"

namespace meanfield {

struct SolverConfig {
  int max_iters = 500;
  double grad_tol = 1e-10;  // on the H1-dual norm of the gradient
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;
  double min_step = 1e-14;
  double cg_tol = 1e-12;
  int cg_max_iters = 5000;

  /// Throws ArgumentError on non-positive entries or armijo_c >= 1.
  void validate() const;
  CgConfig cg() const { return {cg_tol, cg_max_iters}; }
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::string message;
  EnergyBreakdown initial_energy;
  EnergyBreakdown final_energy;
  double residual = 0.0;  // H1-dual norm of the gradient at the returned field
  std::vector<double> grad_norm_history;
  std::vector<double> energy_history;  // initial total plus the accumulated per-step changes
  std::vector<double> step_history;  // accepted step per iteration
  double wall_time = 0.0;            // seconds
};

struct MinimizeResult {
  Field u;
  SolveReport report;
};

/// H1-dual norm sqrt(g^T (S + M)^{-1} g) of the energy gradient: the discrete
/// weak residual of the mean-field problem.
double pde_residual(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u,
                    const CgConfig& cg = {});

/// Sobolev-preconditioned gradient descent on the zero-mean subspace with an
/// Armijo backtracking line search. Line-search failure is reported through
/// converged = false; a non-finite starting energy throws SolverError.
MinimizeResult minimize(const SurfaceMesh& mesh, const Potentials& pot, const Params& p,
                        const SolverConfig& cfg, const Field& init);

struct SweepEntry {
  Params params;
  ParamClass classification;
  bool coercive = false;
  bool on_critical_set = false;
  std::optional<SolveReport> report;  // empty when the point failed
  std::string error;                  // non-empty when the point failed
  Field solution;
};

struct SweepOptions {
  bool warm_start = true;
  int threads = 1;  // used only when warm_start is false
};

/// Solves every grid point in order. With warm starts each run begins at the
/// previous minimizer (zero for the first point); without warm starts the
/// points are independent and may run on several threads. Per-point errors
/// are recorded in the entry and never abort the sweep. Empty grid throws.
std::vector<SweepEntry> continuation_sweep(const SurfaceMesh& mesh, const Potentials& pot,
                                           const std::vector<Params>& grid, const SolverConfig& cfg,
                                           const SweepOptions& options = {});

}  // namespace meanfield
