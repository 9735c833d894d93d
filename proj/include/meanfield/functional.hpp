#pragma once

#include <span>

#include "meanfield/expr.hpp"
#include "meanfield/linalg.hpp"
#include "meanfield/mesh.hpp"

namespace meanfield {

/// Interior parameter rho and boundary parameter rho'.
struct Params {
  double rho = 0.0;
  double rho_prime = 0.0;
};

/// Positive weights K (per vertex) and h (per boundary vertex).
struct Potentials {
  Field K;
  Field h;
};

/// K = 1, h = 1.
Potentials unit_potentials(const SurfaceMesh& mesh);
/// Samples both expressions on the mesh after checking positivity.
Potentials sample_potentials(const SurfaceMesh& mesh, const Expr& K, const Expr& h);

/// Terms of
///   J(u) = 1/2 int |grad u|^2 + 2(rho + rho')/|S| int u
///          - 2 rho log int K e^u - 4 rho' log int_bd h e^(u/2).
struct EnergyBreakdown {
  double dirichlet = 0.0;     // 1/2 int |grad u|^2
  double linear = 0.0;        // 2(rho + rho')/|S| int u
  double log_interior = 0.0;  // log int K e^u
  double log_boundary = 0.0;  // log int_bd h e^(u/2)
  double total = 0.0;
};

/// Area-weighted mean over the domain.
double mean(const SurfaceMesh& mesh, const Field& u);
/// Subtracts the area-weighted mean in place and returns the removed shift.
double remove_mean(const SurfaceMesh& mesh, Field& u);

/// int |grad u|^2 = u^T S u.
double dirichlet_integral(const SurfaceMesh& mesh, const Field& u);

/// log int w e^(scale u) with lumped weights, computed as m + log int w e^(scale u - m).
double log_integral_interior(const SurfaceMesh& mesh, const Field& weight, const Field& u, double scale = 1.0);
double log_integral_boundary(const SurfaceMesh& mesh, const Field& weight, const Field& u, double scale = 0.5);

EnergyBreakdown energy(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u);

/// energy(u + step d) - energy(u), evaluated without subtracting the two
/// totals: quadratic and linear parts in closed form, logarithmic parts as
/// log1p of expm1-weighted means. Accurate relative to the change itself,
/// which the line search needs once the change drops below rounding of the
/// totals.
double energy_change(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u,
                     const Field& d, double step);

/// Exact derivative of the discrete energy (a covector: entries carry the
/// lumped weights). Its entries sum to zero up to rounding.
Field gradient(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u);

/// Zero-mean discrete solution of  lap(phi) = 2 rho'/|S|,  d_nu phi = 2 rho'/|bd S|.
Field solve_phi(const SurfaceMesh& mesh, double rho_prime, const CgConfig& cg);

/// int |grad u|^2 + 8 pi/|S| int u - 4 rho log int e^u - 8 (2 pi - rho) log int_bd e^(u/2).
double mt_deficit(const SurfaceMesh& mesh, double rho, const Field& u);

/// 1/2 log int e^u + eps int |grad u|^2 - log int_bd e^(u/2).
double trace_deficit(const SurfaceMesh& mesh, double eps, const Field& u);

struct ImprovedMtTerms {
  double dirichlet = 0.0;  // int |grad u|^2, coefficient 1
  double rest = 0.0;       // mean and logarithmic terms
  double value() const { return dirichlet + rest; }
};

/// int |grad u|^2 + 8 pi (2J + K)/|S| int u - 16 (J + K) pi log int e^u
///   + 16 K pi log int_bd e^(u/2).
ImprovedMtTerms improved_mt_terms(const SurfaceMesh& mesh, int interior_count, int boundary_count, const Field& u);
double improved_mt_deficit(const SurfaceMesh& mesh, int interior_count, int boundary_count, const Field& u);

/// Smallest coefficient c such that c * dirichlet + rest >= 0 for every
/// probe of a family.
double required_dirichlet_factor(std::span<const ImprovedMtTerms> family);

}  // namespace meanfield
