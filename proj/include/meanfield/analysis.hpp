#pragma once

#include <string>
#include <vector>

#include "meanfield/functional.hpp"
#include "meanfield/mesh.hpp"

namespace meanfield {

// ---------------------------------------------------------------------------
// Parameter-plane classification
// ---------------------------------------------------------------------------

struct SurfaceTopology {
  int genus = 0;
  int boundary_components = 1;
  bool simply_connected = true;

  /// Throws ArgumentError when simply_connected is set for g > 0 or more
  /// than one boundary component.
  void validate() const;
};

SurfaceTopology topology_of(const SurfaceMesh& mesh);

enum class Region { coercive, bounded_boundary_case, unbounded_below, open_endpoint };
enum class Existence {
  minimizer,
  minmax_any_surface,
  minmax_multiply_connected_only,
  open_if_simply_connected,
  unknown
};

std::string to_string(Region r);
std::string to_string(Existence e);

struct BettiEntry {
  int q = 0;
  long long rank = 0;
};

struct BettiResult {
  std::vector<BettiEntry> ranks;      // degrees 0 .. top degree
  bool degenerate_binomial = false;   // a binomial had a negative argument
};

struct ParamClass {
  int N = 0;
  int M = 0;
  bool on_critical_set = false;
  bool interior_critical = false;  // rho in 4 pi N, N >= 1
  bool boundary_critical = false;  // rho + rho' in 2 pi N, N >= 1
  Region region = Region::coercive;
  Existence existence = Existence::minimizer;
  BettiResult betti;  // empty for (N, M) = (0, 0)

  std::string critical_condition() const;
};

/// Tolerance for membership of the critical set, absolute on rho and rho + rho'.
inline constexpr double kCriticalTolerance = 1e-9;

ParamClass classify(double rho, double rho_prime, const SurfaceTopology& topo);

/// Ranks of the homology of the barycenter model space. Throws
/// ArgumentError for (N, M) = (0, 0) or negative indices.
BettiResult betti(const SurfaceTopology& topo, int N, int M);

/// Binomial coefficient, zero when k < 0, k > n or n < 0.
long long binomial(long long n, long long k);

// ---------------------------------------------------------------------------
// Blow-up diagnostics
// ---------------------------------------------------------------------------

/// Discrete measures 2 rho K e^u a_i / int K e^u (per vertex) and
/// 2 rho' h e^(u/2) l_i / int h e^(u/2) (per boundary vertex).
struct ConcentrationPair {
  Field interior_measure;
  Field boundary_measure;
};

ConcentrationPair concentration(const SurfaceMesh& mesh, const Potentials& pot, const Params& p, const Field& u);

/// rho * (interior fraction in B_r(center)) + rho' * (boundary fraction in B_r(center)).
double local_mass(const SurfaceMesh& mesh, const ConcentrationPair& pair, const Params& p, Point center,
                  double radius);

/// Fraction of the interior measure inside B_r(center).
double interior_fraction(const SurfaceMesh& mesh, const ConcentrationPair& pair, Point center, double radius);

/// sqrt(int K e^u) / int_bd h e^(u/2), evaluated in log space.
double quasisharp_ratio(const SurfaceMesh& mesh, const Potentials& pot, const Field& u);

struct SingularPoint {
  int vertex = 0;
  bool on_boundary = false;
  double value = 0.0;
};

/// Local maxima of u strictly above `threshold`, in vertex order. On
/// plateaus the lowest-index vertex wins.
std::vector<SingularPoint> detect_singular_set(const SurfaceMesh& mesh, const Field& u, double threshold);

}  // namespace meanfield
