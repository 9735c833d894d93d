#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace meanfield::detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre over [a, b] split at the given interior breaks.
template <class F>
double integrate_panels(F&& f, const std::vector<double>& edges, const GaussRule& rule) {
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double panel = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) panel += rule.weights[k] * f(mid + half * rule.nodes[k]);
    total += half * panel;
  }
  return total;
}

/// Panel edges on [0, R]: uniform up to `scale`, then geometric with ratio 1.5.
inline std::vector<double> graded_edges(double scale, double R) {
  std::vector<double> edges{0.0};
  const double first = std::min(scale, R);
  for (int k = 1; k <= 8; ++k) edges.push_back(first * k / 8.0);
  double e = first;
  while (e < R) {
    e = std::min(R, e * 1.5);
    edges.push_back(e);
  }
  return edges;
}

}  // namespace meanfield::detail
