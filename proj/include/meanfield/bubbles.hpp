#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meanfield/functional.hpp"
#include "meanfield/mesh.hpp"

namespace meanfield {

enum class Placement { interior, boundary };

struct BubblePoint {
  Point location;
  double weight = 1.0;
  Placement placement = Placement::interior;
};

/// Barycenter sum_i t_i delta_{x_i} and concentration parameter lambda.
struct BubbleConfig {
  std::vector<BubblePoint> points;
  double lambda = 1.0;
  double separation = 0.1;  // minimum distance of interior points from the boundary

  /// Throws ArgumentError on empty points, non-positive weights, weights
  /// not summing to one, lambda < 1, interior points closer than
  /// `separation` to the boundary or boundary points off the boundary.
  void validate(const SurfaceMesh& mesh) const;
  int interior_count() const;
  int boundary_count() const;
};

/// Largest lambda * h over the bubble centers allowed before a field is
/// flagged as under-resolved.
inline constexpr double kResolutionGuard = 0.25;

struct BubbleField {
  Field u;             // zero-mean representative
  double shift = 0.0;  // raw field = u + shift
  bool under_resolved = false;
  double max_lambda_h = 0.0;

  Field raw() const { return u.array() + shift; }
};

/// Distance from `p` to the boundary of the mesh domain (exact for the disk
/// and the annulus).
double distance_to_boundary(const SurfaceMesh& mesh, Point p);

/// Raw bubble log sum_i t_i (lambda / (1 + lambda^2 |x - x_i|^2))^2 at a point.
double bubble_value(const BubbleConfig& cfg, Point x);

/// Vertex samples of the bubble, returned in zero-mean gauge.
BubbleField bubble_field(const SurfaceMesh& mesh, const BubbleConfig& cfg);

// ---------------------------------------------------------------------------
// Entire solutions on the plane and the half-plane
// ---------------------------------------------------------------------------

/// v(x) = log 8 lambda^2 / (1 + lambda^2 |x - x0|^2)^2, solving -lap v = e^v on R^2.
class LiouvilleProfile {
 public:
  LiouvilleProfile(double lambda, Point center);

  double value(Point x) const;
  /// Polar quadrature of e^v over |x - x0| <= R plus the exact tail
  /// 8 pi / (1 + lambda^2 R^2). Defaults to R = 50 / lambda.
  double total_mass(std::optional<double> radius = std::nullopt) const;

  double lambda() const { return lambda_; }
  Point center() const { return center_; }

 private:
  double lambda_;
  Point center_;
};

/// v(x) = log 8 lambda^2 / (a + lambda^2 |x - (s0, -c / (sqrt(2) lambda))|^2)^2,
/// solving -lap v = a e^v in {x2 > 0} and d_nu v = c e^(v/2) on {x2 = 0}
/// with the outward normal nu = (0, -1).
class ZhangProfile {
 public:
  /// Throws ArgumentError when a <= 0 and c <= sqrt(-2a), or when the
  /// denominator vanishes somewhere on the closed half-plane.
  ZhangProfile(double a, double c, double lambda, double s0);

  double value(Point x) const;
  Point center() const;
  /// Smallest denominator a + lambda^2 |x - center|^2 over x2 >= 0.
  double min_denominator() const;

  /// Quadrature of e^v over the half-plane (graded polar grid plus tail).
  double interior_mass() const;
  /// Quadrature of e^(v/2) over the boundary line plus the exact tail.
  double boundary_mass() const;
  /// a * interior_mass() + c * boundary_mass(); expected to equal 4 pi.
  double quantization_value() const;

  double a() const { return a_; }
  double c() const { return c_; }
  double lambda() const { return lambda_; }
  double s0() const { return s0_; }

 private:
  double a_;
  double c_;
  double lambda_;
  double s0_;
};

/// Five-point finite-difference residuals -lap v - e^v and -lap v - a e^v.
double interior_fd_residual(const LiouvilleProfile& profile, Point x, double step);
double interior_fd_residual(const ZhangProfile& profile, Point x, double step);

/// Second-order one-sided residual d_nu v - c e^(v/2) at (x1, 0), nu = (0, -1).
double boundary_fd_residual(const ZhangProfile& profile, double x1, double step);

// ---------------------------------------------------------------------------
// Log-lambda asymptotics
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::pair<double, double> lambda_range{0.0, 0.0};  // exp of the first and last abscissa
};

/// Ordinary least squares ys ~ intercept + slope * xs. Needs at least three
/// strictly increasing abscissae; throws ArgumentError otherwise.
SlopeFit slope_fit(std::span<const double> xs, std::span<const double> ys);

struct AsymptoticSample {
  double lambda = 0.0;
  double dirichlet = 0.0;     // int |grad phi|^2
  double log_interior = 0.0;  // log int K e^phi
  double log_boundary = 0.0;  // log int_bd h e^(phi/2)
  double integral = 0.0;      // int phi (raw, before the gauge shift)
  double energy = 0.0;        // J_{rho, rho'}(phi)
  bool under_resolved = false;
};

struct QuantitySlopes {
  double dirichlet = 0.0;
  double log_interior = 0.0;
  double log_boundary = 0.0;
  double integral = 0.0;
  double energy = 0.0;
};

struct AsymptoticsResult {
  std::vector<AsymptoticSample> samples;
  SlopeFit dirichlet;
  SlopeFit log_interior;
  SlopeFit log_boundary;
  SlopeFit integral;
  SlopeFit energy;
  QuantitySlopes predicted;
  /// True when the configuration mixes interior and boundary points, so the
  /// predictions are assembled from the single-point estimates.
  bool predicted_derived = false;
  bool any_under_resolved = false;
};

/// Log-lambda slopes predicted for `points`: J interior and K boundary
/// centers give Dirichlet 32 pi J + 16 pi K, log int K e^phi 0,
/// log int_bd h e^(phi/2) -1 (no boundary center) or 0, int phi -2|S|.
QuantitySlopes predicted_slopes(const SurfaceMesh& mesh, const BubbleConfig& cfg, const Params& p);

/// Evaluates the bubble family over `lambdas` (geometric, >= 3 entries) and
/// fits each quantity against log lambda.
AsymptoticsResult energy_asymptotics(const SurfaceMesh& mesh, const BubbleConfig& base,
                                     std::span<const double> lambdas, const Potentials& pot, const Params& p);

/// lambdas = first * ratio^k, k = 0..count-1.
std::vector<double> geometric_lambdas(double first, double ratio, int count);

}  // namespace meanfield
