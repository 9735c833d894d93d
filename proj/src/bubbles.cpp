#include "meanfield/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "meanfield/error.hpp"
#include "quadrature.hpp"

namespace meanfield {

namespace {

constexpr double kPi = std::numbers::pi;

const detail::GaussRule& rule16() {
  static const detail::GaussRule rule = detail::gauss_legendre(16);
  return rule;
}

// int_U^inf du / (A + u^2)^2 for U >= 0, A > 0.
double squared_lorentzian_tail(double A, double U) {
  if (U * U > 100.0 * A) {
    const double r = A / (U * U);
    return (1.0 / (3.0 * U * U * U)) * (1.0 - 6.0 / 5.0 * r + 9.0 / 7.0 * r * r - 12.0 / 9.0 * r * r * r);
  }
  const double sa = std::sqrt(A);
  return std::atan(sa / U) / (2.0 * A * sa) - U / (2.0 * A * (A + U * U));
}

}  // namespace

// ---------------------------------------------------------------------------
// Barycenter bubbles
// ---------------------------------------------------------------------------

double distance_to_boundary(const SurfaceMesh& mesh, Point p) {
  const double r = std::hypot(p.x, p.y);
  if (mesh.domain().kind == DomainKind::annulus) return std::min(1.0 - r, r - mesh.domain().r_inner);
  return 1.0 - r;
}

void BubbleConfig::validate(const SurfaceMesh& mesh) const {
  if (points.empty()) throw ArgumentError("bubble needs at least one center");
  if (!(lambda >= 1.0)) throw ArgumentError("bubble lambda must be >= 1, got " + std::to_string(lambda));
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (!(pt.weight > 0.0)) throw ArgumentError("bubble weight " + std::to_string(i) + " is not positive");
    total += pt.weight;
    const double d = distance_to_boundary(mesh, pt.location);
    if (pt.placement == Placement::interior && d < separation) {
      std::ostringstream msg;
      msg << "interior bubble center " << i << " at (" << pt.location.x << ", " << pt.location.y
          << ") lies within " << separation << " of the boundary";
      throw ArgumentError(msg.str());
    }
    if (pt.placement == Placement::boundary && std::abs(d) > 1e-9) {
      std::ostringstream msg;
      msg << "boundary bubble center " << i << " at (" << pt.location.x << ", " << pt.location.y
          << ") is not on the boundary";
      throw ArgumentError(msg.str());
    }
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("bubble weights must sum to 1");
}

int BubbleConfig::interior_count() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(),
                                        [](const BubblePoint& p) { return p.placement == Placement::interior; }));
}

int BubbleConfig::boundary_count() const { return static_cast<int>(points.size()) - interior_count(); }

double bubble_value(const BubbleConfig& cfg, Point x) {
  // log sum_i exp(log t_i + 2 log lambda - 2 log(1 + lambda^2 d_i^2))
  const double log_lambda = std::log(cfg.lambda);
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(cfg.points.size());
  for (const auto& pt : cfg.points) {
    const double d = distance(x, pt.location);
    const double ld = cfg.lambda * d;
    const double term = std::log(pt.weight) + 2.0 * log_lambda - 2.0 * std::log1p(ld * ld);
    terms.push_back(term);
    m = std::max(m, term);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - m);
  return m + std::log(sum);
}

BubbleField bubble_field(const SurfaceMesh& mesh, const BubbleConfig& cfg) {
  cfg.validate(mesh);
  BubbleField field;
  field.u.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) field.u[v] = bubble_value(cfg, mesh.vertices()[v]);
  for (const auto& pt : cfg.points) {
    field.max_lambda_h = std::max(field.max_lambda_h, cfg.lambda * mesh.local_mesh_size(pt.location));
  }
  field.under_resolved = field.max_lambda_h > kResolutionGuard;
  field.shift = remove_mean(mesh, field.u);
  return field;
}

// ---------------------------------------------------------------------------
// Liouville profile
// ---------------------------------------------------------------------------

LiouvilleProfile::LiouvilleProfile(double lambda, Point center) : lambda_(lambda), center_(center) {
  if (!(lambda > 0.0)) throw ArgumentError("Liouville profile needs lambda > 0");
}

double LiouvilleProfile::value(Point x) const {
  const double d = distance(x, center_);
  const double q = 1.0 + lambda_ * lambda_ * d * d;
  return std::log(8.0 * lambda_ * lambda_ / (q * q));
}

double LiouvilleProfile::total_mass(std::optional<double> radius) const {
  const double R = radius.value_or(50.0 / lambda_);
  constexpr int kAngles = 16;
  auto ring = [&](double r) {
    double sum = 0.0;
    for (int k = 0; k < kAngles; ++k) {
      const double theta = 2.0 * kPi * k / kAngles;
      sum += std::exp(value({center_.x + r * std::cos(theta), center_.y + r * std::sin(theta)}));
    }
    return r * sum * (2.0 * kPi / kAngles);
  };
  const double inner = detail::integrate_panels(ring, detail::graded_edges(1.0 / lambda_, R), rule16());
  return inner + 8.0 * kPi / (1.0 + lambda_ * lambda_ * R * R);
}

double interior_fd_residual(const LiouvilleProfile& profile, Point x, double step) {
  const double c = profile.value(x);
  const double lap = (profile.value({x.x + step, x.y}) + profile.value({x.x - step, x.y}) +
                      profile.value({x.x, x.y + step}) + profile.value({x.x, x.y - step}) - 4.0 * c) /
                     (step * step);
  return -lap - std::exp(c);
}

// ---------------------------------------------------------------------------
// Half-plane profile
// ---------------------------------------------------------------------------

ZhangProfile::ZhangProfile(double a, double c, double lambda, double s0) : a_(a), c_(c), lambda_(lambda), s0_(s0) {
  if (!(lambda > 0.0)) throw ArgumentError("half-plane profile needs lambda > 0");
  if (a <= 0.0 && !(c > std::sqrt(-2.0 * a))) {
    std::ostringstream msg;
    msg << "inadmissible half-plane profile: a = " << a << " <= 0 requires c > sqrt(-2a) = " << std::sqrt(-2.0 * a)
        << ", got c = " << c;
    throw ArgumentError(msg.str());
  }
  if (!(min_denominator() > 0.0)) {
    throw ArgumentError("half-plane profile denominator vanishes on the closed half-plane");
  }
}

Point ZhangProfile::center() const { return {s0_, -c_ / (std::sqrt(2.0) * lambda_)}; }

double ZhangProfile::min_denominator() const {
  const double below = std::max(0.0, -center().y);
  return a_ + lambda_ * lambda_ * below * below;
}

double ZhangProfile::value(Point x) const {
  const Point c = center();
  const double d2 = (x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y);
  const double q = a_ + lambda_ * lambda_ * d2;
  return std::log(8.0 * lambda_ * lambda_ / (q * q));
}

double ZhangProfile::interior_mass() const {
  const Point c = center();
  const double lam2 = lambda_ * lambda_;
  // Line integral over x1 of e^v at height x2, by quadrature on
  // |x1 - s0| <= L plus the exact tail.
  auto line = [&](double x2) {
    const double A = a_ + lam2 * (x2 - c.y) * (x2 - c.y);
    const double width = std::sqrt(A) / lambda_;
    const double L = 20.0 * width;
    auto f = [&](double s) { return std::exp(value({s0_ + s, x2})); };
    const double body = 2.0 * detail::integrate_panels(f, detail::graded_edges(width, L), rule16());
    const double tail = 2.0 * 8.0 * lam2 / lambda_ * squared_lorentzian_tail(A, lambda_ * L);
    return body + tail;
  };
  const double scale = std::sqrt(min_denominator()) / lambda_ + std::abs(c.y);
  const double X = 1000.0 * scale;
  std::vector<double> edges = detail::graded_edges(scale, X);
  if (c.y > 0.0) {
    edges.push_back(c.y);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  const double body = detail::integrate_panels(line, edges, rule16());
  // Beyond X the line integrals equal 4 pi lambda / A(x2)^{3/2}; integrate in closed form.
  const double w = lambda_ * (X - c.y);
  const double root = std::sqrt(a_ + w * w);
  const double tail = 4.0 * kPi / ((root + w) * root);
  return body + tail;
}

double ZhangProfile::boundary_mass() const {
  const double B = a_ + c_ * c_ / 2.0;  // denominator at (s0, 0)
  const double width = std::sqrt(B) / lambda_;
  const double L = 50.0 * width;
  auto f = [&](double s) { return std::exp(0.5 * value({s0_ + s, 0.0})); };
  const double body = 2.0 * detail::integrate_panels(f, detail::graded_edges(width, L), rule16());
  const double tail = 2.0 * std::sqrt(8.0) / std::sqrt(B) * std::atan(std::sqrt(B) / (lambda_ * L));
  return body + tail;
}

double ZhangProfile::quantization_value() const { return a_ * interior_mass() + c_ * boundary_mass(); }

double interior_fd_residual(const ZhangProfile& profile, Point x, double step) {
  const double c = profile.value(x);
  const double lap = (profile.value({x.x + step, x.y}) + profile.value({x.x - step, x.y}) +
                      profile.value({x.x, x.y + step}) + profile.value({x.x, x.y - step}) - 4.0 * c) /
                     (step * step);
  return -lap - profile.a() * std::exp(c);
}

double boundary_fd_residual(const ZhangProfile& profile, double x1, double step) {
  const double v0 = profile.value({x1, 0.0});
  const double v1 = profile.value({x1, step});
  const double v2 = profile.value({x1, 2.0 * step});
  const double d_x2 = (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * step);
  return -d_x2 - profile.c() * std::exp(0.5 * v0);
}

// ---------------------------------------------------------------------------
// Slopes
// ---------------------------------------------------------------------------

SlopeFit slope_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ArgumentError("slope_fit: abscissae and ordinates differ in length");
  if (xs.size() < 3) throw ArgumentError("slope_fit needs at least 3 samples");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ArgumentError("slope_fit: abscissae must be strictly increasing");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fit.max_residual = std::max(fit.max_residual, std::abs(ys[i] - fit.intercept - fit.slope * xs[i]));
  }
  fit.lambda_range = {std::exp(xs.front()), std::exp(xs.back())};
  return fit;
}

std::vector<double> geometric_lambdas(double first, double ratio, int count) {
  std::vector<double> lambdas;
  double value = first;
  for (int k = 0; k < count; ++k) {
    lambdas.push_back(value);
    value *= ratio;
  }
  return lambdas;
}

QuantitySlopes predicted_slopes(const SurfaceMesh& mesh, const BubbleConfig& cfg, const Params& p) {
  const int j = cfg.interior_count();
  const int k = cfg.boundary_count();
  QuantitySlopes s;
  s.dirichlet = 32.0 * kPi * j + 16.0 * kPi * k;
  s.log_interior = 0.0;
  s.log_boundary = k > 0 ? 0.0 : -1.0;
  s.integral = -2.0 * mesh.area();
  s.energy = 0.5 * s.dirichlet + 2.0 * (p.rho + p.rho_prime) / mesh.area() * s.integral -
             2.0 * p.rho * s.log_interior - 4.0 * p.rho_prime * s.log_boundary;
  return s;
}

AsymptoticsResult energy_asymptotics(const SurfaceMesh& mesh, const BubbleConfig& base,
                                     std::span<const double> lambdas, const Potentials& pot, const Params& p) {
  if (lambdas.size() < 3) throw ArgumentError("energy_asymptotics needs at least 3 lambda samples");
  AsymptoticsResult result;
  std::vector<double> xs;
  std::vector<double> d, li, lb, in, en;
  for (double lambda : lambdas) {
    BubbleConfig cfg = base;
    cfg.lambda = lambda;
    const BubbleField field = bubble_field(mesh, cfg);
    const Field raw = field.raw();
    const EnergyBreakdown e = energy(mesh, pot, p, raw);
    AsymptoticSample s;
    s.lambda = lambda;
    s.dirichlet = 2.0 * e.dirichlet;
    s.log_interior = e.log_interior;
    s.log_boundary = e.log_boundary;
    s.integral = integrate_interior(mesh, raw);
    s.energy = e.total;
    s.under_resolved = field.under_resolved;
    result.any_under_resolved = result.any_under_resolved || s.under_resolved;
    result.samples.push_back(s);
    xs.push_back(std::log(lambda));
    d.push_back(s.dirichlet);
    li.push_back(s.log_interior);
    lb.push_back(s.log_boundary);
    in.push_back(s.integral);
    en.push_back(s.energy);
  }
  result.dirichlet = slope_fit(xs, d);
  result.log_interior = slope_fit(xs, li);
  result.log_boundary = slope_fit(xs, lb);
  result.integral = slope_fit(xs, in);
  result.energy = slope_fit(xs, en);
  result.predicted = predicted_slopes(mesh, base, p);
  result.predicted_derived = base.interior_count() > 0 && base.boundary_count() > 0;
  return result;
}

}  // namespace meanfield
