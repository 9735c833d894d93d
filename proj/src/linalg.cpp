#include "meanfield/linalg.hpp"

#include <cmath>
#include <sstream>

#include "meanfield/error.hpp"

namespace meanfield {

CgResult cg_solve(const LinearOperator& op, const Field& rhs, const CgConfig& cfg,
                  const Field& inverse_diagonal, const Field& initial) {
  const Eigen::Index n = rhs.size();
  CgResult result;
  result.x = initial.size() == n ? initial : Field::Zero(n);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.x.setZero();
    return result;
  }
  const double target = cfg.tol * rhs_norm;
  const bool precondition = inverse_diagonal.size() == n;

  Field ax(n);
  op(result.x, ax);
  Field r = rhs - ax;
  Field z = precondition ? Field(inverse_diagonal.cwiseProduct(r)) : r;
  Field d = z;
  double rz = r.dot(z);
  Field ad(n);
  result.residual_norm = r.norm();
  while (result.residual_norm > target) {
    if (result.iterations >= cfg.max_iters) {
      std::ostringstream msg;
      msg << "conjugate gradients did not converge in " << cfg.max_iters
          << " iterations: residual " << result.residual_norm << " > " << target;
      throw SolverError(msg.str());
    }
    op(d, ad);
    const double curvature = d.dot(ad);
    if (!(curvature > 0.0)) throw SolverError("conjugate gradients: operator is not positive definite");
    const double alpha = rz / curvature;
    result.x += alpha * d;
    r -= alpha * ad;
    if (precondition) {
      z = inverse_diagonal.cwiseProduct(r);
    } else {
      z = r;
    }
    const double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
    result.residual_norm = r.norm();
    ++result.iterations;
  }
  return result;
}

CgResult cg_solve(const SparseMatrix& matrix, const Field& rhs, const CgConfig& cfg) {
  const Field inverse_diagonal = matrix.diagonal().cwiseInverse();
  return cg_solve([&](const Field& x, Field& y) { y.noalias() = matrix * x; }, rhs, cfg,
                  inverse_diagonal);
}

SparseMatrix sobolev_operator(const SurfaceMesh& mesh) {
  SparseMatrix op = mesh.stiffness();
  for (int v = 0; v < mesh.num_vertices(); ++v) op.coeffRef(v, v) += mesh.vertex_area()[v];
  return op;
}

}  // namespace meanfield
