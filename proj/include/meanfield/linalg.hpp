#pragma once

#include <functional>

#include "meanfield/mesh.hpp"

namespace meanfield {

struct CgConfig {
  double tol = 1e-12;  // relative to the right-hand side norm
  int max_iters = 5000;
};

struct CgResult {
  Field x;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// y = A x for a symmetric operator.
using LinearOperator = std::function<void(const Field& x, Field& y)>;

/// Jacobi-preconditioned conjugate gradients. `inverse_diagonal` may be empty
/// (no preconditioning). Stops when ||b - A x|| <= tol * ||b||; throws
/// SolverError with the final residual when the iteration cap is hit.
CgResult cg_solve(const LinearOperator& op, const Field& rhs, const CgConfig& cfg,
                  const Field& inverse_diagonal = Field(), const Field& initial = Field());

CgResult cg_solve(const SparseMatrix& matrix, const Field& rhs, const CgConfig& cfg);

/// S + M with M the lumped mass matrix: the H1 inner product used as the
/// descent metric.
SparseMatrix sobolev_operator(const SurfaceMesh& mesh);

}  // namespace meanfield
