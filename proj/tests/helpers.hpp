#pragma once

#include <cstdint>
#include <random>

#include "meanfield/mesh.hpp"

namespace testing {

inline Eigen::VectorXd random_field(int n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = dist(gen);
  return f;
}

template <class F>
Eigen::VectorXd vertex_field(const meanfield::SurfaceMesh& mesh, F&& f) {
  Eigen::VectorXd out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = f(mesh.vertices()[v]);
  return out;
}

template <class F>
Eigen::VectorXd boundary_field(const meanfield::SurfaceMesh& mesh, F&& f) {
  Eigen::VectorXd out(mesh.num_boundary_vertices());
  for (int k = 0; k < mesh.num_boundary_vertices(); ++k) out[k] = f(mesh.vertices()[mesh.boundary_vertices()[k]]);
  return out;
}

}  // namespace testing
