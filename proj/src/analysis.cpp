#include "meanfield/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

constexpr double kPi = std::numbers::pi;

// Smallest n >= 0 with value < period * (n + 1); a value within the critical
// tolerance of period * k (k >= 1) counts as exactly on it.
int band_index(double value, double period, bool& critical) {
  const double k = std::round(value / period);
  critical = k >= 1.0 && std::abs(value - period * k) <= kCriticalTolerance;
  if (critical) return static_cast<int>(k);
  if (value < period) return 0;
  return static_cast<int>(std::floor(value / period));
}

}  // namespace

void SurfaceTopology::validate() const {
  if (genus < 0 || boundary_components < 1) {
    throw ArgumentError("topology needs genus >= 0 and at least one boundary component");
  }
  if (simply_connected && (genus != 0 || boundary_components != 1)) {
    throw ArgumentError("a simply connected surface with boundary is a disk: genus 0, one boundary component");
  }
}

SurfaceTopology topology_of(const SurfaceMesh& mesh) {
  const int b = static_cast<int>(mesh.boundary_loops().size());
  // chi = 2 - 2g - b
  const int g = (2 - b - mesh.euler_characteristic()) / 2;
  return {g, b, g == 0 && b == 1};
}

std::string to_string(Region r) {
  switch (r) {
    case Region::coercive: return "coercive";
    case Region::bounded_boundary_case: return "bounded_boundary_case";
    case Region::unbounded_below: return "unbounded_below";
    case Region::open_endpoint: return "open_endpoint";
  }
  return "?";
}

std::string to_string(Existence e) {
  switch (e) {
    case Existence::minimizer: return "minimizer";
    case Existence::minmax_any_surface: return "minmax_any_surface";
    case Existence::minmax_multiply_connected_only: return "minmax_multiply_connected_only";
    case Existence::open_if_simply_connected: return "open_if_simply_connected";
    case Existence::unknown: return "unknown";
  }
  return "?";
}

std::string ParamClass::critical_condition() const {
  if (interior_critical && boundary_critical) return "rho in 4piN; rho+rho' in 2piN";
  if (interior_critical) return "rho in 4piN";
  if (boundary_critical) return "rho+rho' in 2piN";
  return "";
}

long long binomial(long long n, long long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (long long i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

BettiResult betti(const SurfaceTopology& topo, int N, int M) {
  if (N < 0 || M < 0 || (N == 0 && M == 0)) {
    throw ArgumentError("Betti numbers need N, M >= 0 and (N, M) != (0, 0); got (" + std::to_string(N) + ", " +
                        std::to_string(M) + ")");
  }
  const long long g = topo.genus;
  BettiResult result;
  if (N >= M) {
    const int top = 2 * N - 1;
    result.degenerate_binomial = g - 1 < 0;
    for (int q = 0; q <= top; ++q) {
      result.ranks.push_back({q, q == top ? binomial(N + g - 1, g - 1) : 0});
    }
  } else {
    const long long low = std::max<long long>(M - 1, 2LL * M - g - 1);
    const int top = 2 * M - 1;
    for (int q = 0; q <= top; ++q) {
      long long rank = 0;
      if (q >= low) {
        const long long n1 = q - M + g + 1;
        const long long k2 = 2LL * M - q - 1;
        if (n1 < 0 || k2 < 0) result.degenerate_binomial = true;
        rank = binomial(n1, g) * binomial(g, k2);
      }
      result.ranks.push_back({q, rank});
    }
  }
  return result;
}

ParamClass classify(double rho, double rho_prime, const SurfaceTopology& topo) {
  topo.validate();
  ParamClass c;
  const double sum = rho + rho_prime;
  c.N = band_index(rho, 4.0 * kPi, c.interior_critical);
  c.M = band_index(sum, 2.0 * kPi, c.boundary_critical);
  c.on_critical_set = c.interior_critical || c.boundary_critical;

  const bool at_endpoint =
      std::abs(rho - 4.0 * kPi) <= kCriticalTolerance && std::abs(sum - 2.0 * kPi) <= kCriticalTolerance;
  const bool rho_below = rho < 4.0 * kPi && !(c.interior_critical && c.N == 1);
  const bool sum_below = sum < 2.0 * kPi && !(c.boundary_critical && c.M == 1);
  const bool rho_at_most = rho_below || (c.interior_critical && c.N == 1);
  const bool sum_at_most = sum_below || (c.boundary_critical && c.M == 1);

  if (at_endpoint) {
    c.region = Region::open_endpoint;
  } else if (rho_below && sum_below) {
    c.region = Region::coercive;
  } else if (rho_at_most && sum_at_most) {
    c.region = Region::bounded_boundary_case;
  } else {
    c.region = Region::unbounded_below;
  }

  if (c.region == Region::coercive) {
    c.existence = Existence::minimizer;
  } else if (c.on_critical_set || c.region == Region::open_endpoint) {
    c.existence = Existence::unknown;
  } else if (c.N < c.M) {
    c.existence = Existence::minmax_any_surface;
  } else if (!topo.simply_connected) {
    c.existence = Existence::minmax_multiply_connected_only;
  } else {
    c.existence = Existence::open_if_simply_connected;
  }

  if (c.N != 0 || c.M != 0) c.betti = betti(topo, c.N, c.M);
  return c;
}

ConcentrationPair concentration(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u) {
  ConcentrationPair pair;
  const double m = u.maxCoeff();
  Field interior = (u.array() - m).exp().matrix().cwiseProduct(pot.K).cwiseProduct(mesh.vertex_area());
  pair.interior_measure = (2.0 * p.rho / interior.sum()) * interior;

  const Field ub = mesh.boundary_values(u);
  const double mb = ub.maxCoeff();
  Field boundary =
      (0.5 * (ub.array() - mb)).exp().matrix().cwiseProduct(pot.h).cwiseProduct(mesh.boundary_length());
  pair.boundary_measure = (2.0 * p.rho_prime / boundary.sum()) * boundary;
  return pair;
}

namespace {

double fraction_inside(const Field& measure, const std::vector<Point>& points, Point center, double radius) {
  double inside = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < measure.size(); ++i) {
    total += measure[i];
    if (distance(points[i], center) < radius) inside += measure[i];
  }
  return total == 0.0 ? 0.0 : inside / total;
}

std::vector<Point> vertex_points(const SurfaceMesh& mesh) {
  return {mesh.vertices().begin(), mesh.vertices().end()};
}

std::vector<Point> boundary_points(const SurfaceMesh& mesh) {
  std::vector<Point> pts;
  for (int v : mesh.boundary_vertices()) pts.push_back(mesh.vertices()[v]);
  return pts;
}

}  // namespace

double interior_fraction(const SurfaceMesh& mesh, const ConcentrationPair& pair, Point center, double radius) {
  return fraction_inside(pair.interior_measure, vertex_points(mesh), center, radius);
}

double local_mass(const SurfaceMesh& mesh, const ConcentrationPair& pair, const Params& p, Point center,
                  double radius) {
  if (!(radius > 0.0)) throw ArgumentError("local_mass needs a positive radius");
  const double interior = fraction_inside(pair.interior_measure, vertex_points(mesh), center, radius);
  const double boundary = fraction_inside(pair.boundary_measure, boundary_points(mesh), center, radius);
  return p.rho * interior + p.rho_prime * boundary;
}

double quasisharp_ratio(const SurfaceMesh& mesh, const Potentials& pot, const Field& u) {
  return std::exp(0.5 * log_integral_interior(mesh, pot.K, u) - log_integral_boundary(mesh, pot.h, u));
}

std::vector<SingularPoint> detect_singular_set(const SurfaceMesh& mesh, const Field& u, double threshold) {
  std::vector<SingularPoint> result;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!(u[v] > threshold)) continue;
    bool is_max = true;
    for (int n : mesh.neighbours(v)) {
      if (u[n] > u[v] || (u[n] == u[v] && n < v)) {
        is_max = false;
        break;
      }
    }
    if (is_max) result.push_back({v, mesh.on_boundary(v), u[v]});
  }
  return result;
}

}  // namespace meanfield
