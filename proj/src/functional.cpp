#include "meanfield/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(const SurfaceMesh& mesh, const Field& u) {
  if (u.size() != mesh.num_vertices()) {
    throw FieldError("field has " + std::to_string(u.size()) + " entries, mesh has " +
                     std::to_string(mesh.num_vertices()) + " vertices");
  }
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) throw FieldError("non-finite field entry at vertex " + std::to_string(i));
  }
}

void require_potentials(const SurfaceMesh& mesh, const Potentials& pot) {
  if (pot.K.size() != mesh.num_vertices() || pot.h.size() != mesh.num_boundary_vertices()) {
    throw FieldError("potentials do not match the mesh: K has " + std::to_string(pot.K.size()) + " entries, h has " +
                     std::to_string(pot.h.size()));
  }
  for (Eigen::Index i = 0; i < pot.K.size(); ++i) {
    if (!(pot.K[i] > 0.0) || !std::isfinite(pot.K[i])) throw FieldError("K not positive at vertex " + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < pot.h.size(); ++i) {
    if (!(pot.h[i] > 0.0) || !std::isfinite(pot.h[i])) {
      throw FieldError("h not positive at boundary vertex " + std::to_string(i));
    }
  }
}

double log_weighted_exp(const Field& quad_weights, const Field& values) {
  const double m = values.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) sum += quad_weights[i] * std::exp(values[i] - m);
  return m + std::log(sum);
}

}  // namespace

Potentials unit_potentials(const SurfaceMesh& mesh) {
  return {Field::Ones(mesh.num_vertices()), Field::Ones(mesh.num_boundary_vertices())};
}

Potentials sample_potentials(const SurfaceMesh& mesh, const Expr& K, const Expr& h) {
  validate_positive(K, mesh, false);
  validate_positive(h, mesh, true);
  return {sample(K, mesh, false), sample(h, mesh, true)};
}

double mean(const SurfaceMesh& mesh, const Field& u) { return integrate_interior(mesh, u) / mesh.area(); }

double remove_mean(const SurfaceMesh& mesh, Field& u) {
  const double shift = mean(mesh, u);
  u.array() -= shift;
  return shift;
}

double dirichlet_integral(const SurfaceMesh& mesh, const Field& u) { return u.dot(mesh.stiffness() * u); }

double log_integral_interior(const SurfaceMesh& mesh, const Field& weight, const Field& u, double scale) {
  return log_weighted_exp(mesh.vertex_area().cwiseProduct(weight), scale * u);
}

double log_integral_boundary(const SurfaceMesh& mesh, const Field& weight, const Field& u, double scale) {
  return log_weighted_exp(mesh.boundary_length().cwiseProduct(weight), scale * mesh.boundary_values(u));
}

EnergyBreakdown energy(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u) {
  require_finite(mesh, u);
  require_potentials(mesh, pot);
  EnergyBreakdown e;
  e.dirichlet = 0.5 * dirichlet_integral(mesh, u);
  e.linear = 2.0 * (p.rho + p.rho_prime) / mesh.area() * integrate_interior(mesh, u);
  e.log_interior = log_integral_interior(mesh, pot.K, u);
  e.log_boundary = log_integral_boundary(mesh, pot.h, u);
  e.total = e.dirichlet + e.linear - 2.0 * p.rho * e.log_interior - 4.0 * p.rho_prime * e.log_boundary;
  return e;
}

namespace {

// log(int w e^(scale (u + step d)) / int w e^(scale u)).
double log_ratio(const Field& weight, const Field& u, const Field& d, double scale, double step) {
  const double m = u.maxCoeff();
  double total = 0.0;
  double change = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double w = weight[i] * std::exp(scale * (u[i] - m));
    total += w;
    change += w * std::expm1(scale * step * d[i]);
  }
  return std::log1p(change / total);
}

}  // namespace

double energy_change(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u,
                     const Field& d, double step) {
  require_finite(mesh, u);
  require_finite(mesh, d);
  require_potentials(mesh, pot);
  const Field Sd = mesh.stiffness() * d;
  const double quadratic = step * Sd.dot(u) + 0.5 * step * step * Sd.dot(d);
  const double linear = 2.0 * (p.rho + p.rho_prime) / mesh.area() * step * integrate_interior(mesh, d);
  const double interior = log_ratio(mesh.vertex_area().cwiseProduct(pot.K), u, d, 1.0, step);
  double boundary = 0.0;
  if (p.rho_prime != 0.0) {
    boundary = log_ratio(mesh.boundary_length().cwiseProduct(pot.h), mesh.boundary_values(u),
                         mesh.boundary_values(d), 0.5, step);
  }
  return quadratic + linear - 2.0 * p.rho * interior - 4.0 * p.rho_prime * boundary;
}

Field gradient(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u) {
  require_finite(mesh, u);
  require_potentials(mesh, pot);
  const Field& area = mesh.vertex_area();
  Field g = mesh.stiffness() * u;
  g += (2.0 * (p.rho + p.rho_prime) / mesh.area()) * area;

  // Normalized exponential measures, shifted by the maximum for stability.
  const double m = u.maxCoeff();
  Field interior = (u.array() - m).exp().matrix().cwiseProduct(pot.K).cwiseProduct(area);
  g -= (2.0 * p.rho / interior.sum()) * interior;

  const Field ub = mesh.boundary_values(u);
  const double mb = ub.maxCoeff();
  Field boundary = (0.5 * (ub.array() - mb)).exp().matrix().cwiseProduct(pot.h).cwiseProduct(mesh.boundary_length());
  const double scale = 2.0 * p.rho_prime / boundary.sum();
  for (int k = 0; k < mesh.num_boundary_vertices(); ++k) {
    g[mesh.boundary_vertices()[k]] -= scale * boundary[k];
  }
  return g;
}

Field solve_phi(const SurfaceMesh& mesh, double rho_prime, const CgConfig& cg) {
  const Field& area = mesh.vertex_area();
  Field rhs = (-2.0 * rho_prime / mesh.area()) * area;
  for (int k = 0; k < mesh.num_boundary_vertices(); ++k) {
    rhs[mesh.boundary_vertices()[k]] += 2.0 * rho_prime / mesh.perimeter() * mesh.boundary_length()[k];
  }
  rhs.array() -= rhs.sum() / rhs.size();  // rounding only; the sum vanishes exactly in theory

  // S + a a^T / |S| is definite, and its solution has zero mean because the
  // right-hand side has zero sum.
  const SparseMatrix& s = mesh.stiffness();
  const double inv_area = 1.0 / mesh.area();
  const Field inverse_diagonal =
      (s.diagonal() + inv_area * area.cwiseProduct(area)).cwiseInverse();
  auto op = [&](const Field& x, Field& y) {
    y.noalias() = s * x;
    y += (inv_area * area.dot(x)) * area;
  };
  Field phi = cg_solve(op, rhs, cg, inverse_diagonal).x;
  remove_mean(mesh, phi);
  return phi;
}

double mt_deficit(const SurfaceMesh& mesh, double rho, const Field& u) {
  require_finite(mesh, u);
  const Field one_interior = Field::Ones(mesh.num_vertices());
  const Field one_boundary = Field::Ones(mesh.num_boundary_vertices());
  return dirichlet_integral(mesh, u) + 8.0 * kPi / mesh.area() * integrate_interior(mesh, u) -
         4.0 * rho * log_integral_interior(mesh, one_interior, u) -
         8.0 * (2.0 * kPi - rho) * log_integral_boundary(mesh, one_boundary, u);
}

double trace_deficit(const SurfaceMesh& mesh, double eps, const Field& u) {
  if (!(eps > 0.0)) throw ArgumentError("trace_deficit needs eps > 0");
  require_finite(mesh, u);
  const Field one_interior = Field::Ones(mesh.num_vertices());
  const Field one_boundary = Field::Ones(mesh.num_boundary_vertices());
  return 0.5 * log_integral_interior(mesh, one_interior, u) + eps * dirichlet_integral(mesh, u) -
         log_integral_boundary(mesh, one_boundary, u);
}

ImprovedMtTerms improved_mt_terms(const SurfaceMesh& mesh, int interior_count, int boundary_count,
                                  const Field& u) {
  if (interior_count < 0 || boundary_count < 0 || interior_count + boundary_count == 0) {
    throw ArgumentError("improved Moser-Trudinger probe needs J, K >= 0, not both zero; got J=" +
                        std::to_string(interior_count) + ", K=" + std::to_string(boundary_count));
  }
  require_finite(mesh, u);
  const double j = interior_count;
  const double k = boundary_count;
  const Field one_interior = Field::Ones(mesh.num_vertices());
  const Field one_boundary = Field::Ones(mesh.num_boundary_vertices());
  ImprovedMtTerms t;
  t.dirichlet = dirichlet_integral(mesh, u);
  t.rest = 8.0 * kPi * (2.0 * j + k) / mesh.area() * integrate_interior(mesh, u) -
           16.0 * (j + k) * kPi * log_integral_interior(mesh, one_interior, u) +
           16.0 * k * kPi * log_integral_boundary(mesh, one_boundary, u);
  return t;
}

double improved_mt_deficit(const SurfaceMesh& mesh, int interior_count, int boundary_count, const Field& u) {
  return improved_mt_terms(mesh, interior_count, boundary_count, u).value();
}

double required_dirichlet_factor(std::span<const ImprovedMtTerms> family) {
  double factor = -std::numeric_limits<double>::infinity();
  for (const auto& t : family) {
    if (t.dirichlet > 0.0) factor = std::max(factor, -t.rest / t.dirichlet);
  }
  return factor;
}

}  // namespace meanfield
