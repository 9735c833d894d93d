#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "meanfield/bubbles.hpp"
#include "meanfield/error.hpp"

using namespace meanfield;

namespace {

constexpr double kPi = std::numbers::pi;

BubbleConfig one(Point p, Placement where, double lambda) { return {{{p, 1.0, where}}, lambda, 0.1}; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("bubble values") {
  for (double lambda : {1.0, 7.0, 300.0}) {
    CHECK(bubble_value(one({0.2, 0.1}, Placement::interior, lambda), {0.2, 0.1}) ==
          doctest::Approx(2.0 * std::log(lambda)).epsilon(1e-14));
  }
  const BubbleConfig two{{{{-0.5, 0}, 0.5, Placement::interior}, {{0.5, 0}, 0.5, Placement::interior}}, 1000.0, 0.1};
  CHECK(bubble_value(two, {-0.5, 0}) == doctest::Approx(2.0 * std::log(1000.0) + std::log(0.5)).epsilon(1e-3));
}

TEST_CASE("bubble config validation") {
  const SurfaceMesh mesh = build_disk_mesh({8, 32});
  CHECK_NOTHROW(one({0, 0}, Placement::interior, 2.0).validate(mesh));
  CHECK_NOTHROW(one({0, 1}, Placement::boundary, 2.0).validate(mesh));
  CHECK_THROWS_AS(BubbleConfig{}.validate(mesh), ArgumentError);
  CHECK_THROWS_AS(one({0, 0}, Placement::interior, 0.5).validate(mesh), ArgumentError);
  CHECK_THROWS_AS(one({0.95, 0}, Placement::interior, 2.0).validate(mesh), ArgumentError);
  CHECK_THROWS_AS(one({0.5, 0}, Placement::boundary, 2.0).validate(mesh), ArgumentError);
  const BubbleConfig unbalanced{{{{0, 0}, 0.7, Placement::interior}, {{0.2, 0}, 0.7, Placement::interior}}, 2.0, 0.1};
  CHECK_THROWS_AS(unbalanced.validate(mesh), ArgumentError);
  const BubbleConfig negative{{{{0, 0}, 1.5, Placement::interior}, {{0.2, 0}, -0.5, Placement::interior}}, 2.0, 0.1};
  CHECK_THROWS_AS(negative.validate(mesh), ArgumentError);
  const SurfaceMesh ring = build_annulus_mesh(0.5, {8, 64});
  CHECK_NOTHROW(one({0, 0.5}, Placement::boundary, 2.0).validate(ring));
  CHECK_THROWS_AS(one({0, 0.55}, Placement::interior, 2.0).validate(ring), ArgumentError);
  CHECK(distance_to_boundary(ring, {0.7, 0.0}) == doctest::Approx(0.2));
}

TEST_CASE("bubble field quadrature against the closed form") {
  // lambda = 1 at the origin: int_{B_1} (1 + r^2)^-2 = pi / 2
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  const BubbleField f = bubble_field(mesh, one({0, 0}, Placement::interior, 1.0));
  const double integral = integrate_interior(mesh, f.raw().array().exp().matrix());
  CHECK(rel(integral, kPi / 2.0) <= 1e-3);
  CHECK(std::abs(mean(mesh, f.u)) <= 1e-12);
  CHECK_FALSE(f.under_resolved);
}

TEST_CASE("bubble field at lambda one is bounded") {
  const SurfaceMesh mesh = build_disk_mesh({16, 64});
  const BubbleField f = bubble_field(mesh, one({0.3, -0.2}, Placement::interior, 1.0));
  CHECK(f.u.maxCoeff() - f.u.minCoeff() <= 2.0 * std::log(1.0 + 4.0) + 1e-12);
}

TEST_CASE("interior mass concentrates") {
  // int e^phi itself grows like pi lambda^2 / (1 + lambda^2); the share outside a fixed ball shrinks
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  double previous = 1.0;
  for (double lambda : {2.0, 4.0, 8.0, 16.0}) {
    const BubbleField f = bubble_field(mesh, one({0, 0}, Placement::interior, lambda));
    const Field w = f.raw().array().exp().matrix();
    Field outside = w;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (std::hypot(mesh.vertices()[v].x, mesh.vertices()[v].y) < 0.25) outside[v] = 0.0;
    }
    const double share = integrate_interior(mesh, outside) / integrate_interior(mesh, w);
    CHECK(share <= previous);
    previous = share;
    CHECK(integrate_interior(mesh, w) == doctest::Approx(kPi * lambda * lambda / (1.0 + lambda * lambda)).epsilon(2e-2));
  }
}

TEST_CASE("resolution guard") {
  const SurfaceMesh mesh = build_disk_mesh({16, 64});
  const BubbleField coarse = bubble_field(mesh, one({0, 0}, Placement::interior, 100.0));
  CHECK(coarse.under_resolved);
  CHECK(coarse.max_lambda_h > kResolutionGuard);
  const BubbleField fine = bubble_field(mesh, one({0, 0}, Placement::interior, 1.0));
  CHECK_FALSE(fine.under_resolved);
}

TEST_CASE("Liouville profile") {
  for (double lambda : {0.5, 1.0, 4.0, 50.0}) {
    for (Point c : {Point{0, 0}, Point{3, -2}}) {
      const LiouvilleProfile prof(lambda, c);
      CHECK(std::abs(prof.total_mass() - 8.0 * kPi) <= 1e-6);
      CHECK(prof.value(c) == doctest::Approx(std::log(8.0 * lambda * lambda)).epsilon(1e-15));
    }
  }
  // the split radius between quadrature and exact tail does not matter
  const LiouvilleProfile p(2.0, {0, 0});
  for (double r : {0.1, 0.5, 3.0, 400.0}) CHECK(std::abs(p.total_mass(r) - 8.0 * kPi) <= 1e-6);
  CHECK_THROWS_AS(LiouvilleProfile(0.0, {0, 0}), ArgumentError);
}

TEST_CASE("Liouville residual oracle") {
  // stencil error grows like lambda^4 h^2, so the step-1e-3 oracle is run at lambda <= 1
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double lambda : {0.5, 1.0}) {
    const LiouvilleProfile prof(lambda, {0.4, -0.1});
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Point x{0.4 + u(gen) / lambda, -0.1 + u(gen) / lambda};
      worst = std::max(worst, std::abs(interior_fd_residual(prof, x, 1e-3)));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("half-plane profile quantization") {
  const ZhangProfile spec_case(-1.0, 2.0, 1.0, 0.0);
  CHECK(rel(spec_case.quantization_value(), 4.0 * kPi) <= 0.01);
  // frozen closed forms: int e^v = (4 pi / a)(1 - (c / sqrt 2) / sqrt(a + c^2 / 2)),
  // int_bd e^(v/2) = sqrt(8) pi / sqrt(a + c^2 / 2)
  for (double a : {1.0, 0.5, 2.0}) {
    for (double c : {-1.0, 0.0, 1.5}) {
      for (double lambda : {0.5, 3.0}) {
        const ZhangProfile z(a, c, lambda, 0.7);
        const double b = a + 0.5 * c * c;
        CHECK(rel(z.interior_mass(), 4.0 * kPi / a * (1.0 - c / std::sqrt(2.0) / std::sqrt(b))) <= 1e-8);
        CHECK(rel(z.boundary_mass(), std::sqrt(8.0) * kPi / std::sqrt(b)) <= 1e-8);
        CHECK(rel(z.quantization_value(), 4.0 * kPi) <= 1e-8);
      }
    }
  }
  const ZhangProfile flat(0.0, 1.0, 2.0, 0.0);
  CHECK(rel(flat.quantization_value(), 4.0 * kPi) <= 1e-8);
}

TEST_CASE("half-plane profile residual oracle") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [a, c] : {std::pair{-1.0, 2.0}, {1.0, 1.0}, {1.0, -1.0}, {0.0, 1.0}}) {
    const ZhangProfile prof(a, c, 1.0, 0.2);
    double interior = 0.0, boundary = 0.0;
    for (int k = 0; k < 100; ++k) {
      interior = std::max(interior, std::abs(interior_fd_residual(prof, {0.2 + 6 * u(gen) - 3, 2e-3 + 3 * u(gen)}, 1e-3)));
      boundary = std::max(boundary, std::abs(boundary_fd_residual(prof, 0.2 + 6 * u(gen) - 3, 1e-3)));
    }
    CHECK(interior <= 1e-4);
    CHECK(boundary <= 1e-3);
  }
}

TEST_CASE("inadmissible half-plane parameters") {
  CHECK_THROWS_AS(ZhangProfile(-2.0, 1.0, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(ZhangProfile(-2.0, 2.0, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(ZhangProfile(0.0, 0.0, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(ZhangProfile(1.0, 1.0, 0.0, 0.0), ArgumentError);
  CHECK_NOTHROW(ZhangProfile(-2.0, 2.1, 1.0, 0.0));
}

TEST_CASE("slope fit") {
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> line{1.0, 3.0, 5.0, 7.0};
  const SlopeFit f = slope_fit(xs, line);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.max_residual <= 1e-14);
  CHECK(slope_fit(xs, std::vector<double>{4.0, 4.0, 4.0, 4.0}).slope == doctest::Approx(0.0));

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
  std::vector<double> lx, ly;
  for (double lambda : geometric_lambdas(8.0, 2.0, 5)) {
    lx.push_back(std::log(lambda));
    ly.push_back(32.0 * kPi * lx.back() + 3.0 + noise(gen));
  }
  CHECK(std::abs(slope_fit(lx, ly).slope - 32.0 * kPi) <= 1e-2);

  CHECK_THROWS_AS(slope_fit(std::vector<double>{0, 1}, std::vector<double>{0, 1}), ArgumentError);
  CHECK_THROWS_AS(slope_fit(std::vector<double>{0, 2, 1}, std::vector<double>{0, 1, 2}), ArgumentError);
  CHECK_THROWS_AS(slope_fit(xs, std::vector<double>{1, 2, 3}), ArgumentError);
}

TEST_CASE("geometric lambdas") {
  const auto l = geometric_lambdas(8.0, 2.0, 8);
  REQUIRE(l.size() == 8);
  CHECK(l.front() == 8.0);
  CHECK(l.back() == 1024.0);
}

TEST_CASE("predicted slopes") {
  const SurfaceMesh mesh = build_disk_mesh({8, 32});
  const Params p{5.0 * kPi, 0.0};
  const QuantitySlopes in = predicted_slopes(mesh, one({0, 0}, Placement::interior, 1.0), p);
  CHECK(in.dirichlet == doctest::Approx(32.0 * kPi));
  CHECK(in.log_boundary == -1.0);
  CHECK(in.integral == doctest::Approx(-2.0 * mesh.area()));
  CHECK(in.energy == doctest::Approx(16.0 * kPi - 4.0 * p.rho));
  const QuantitySlopes bd = predicted_slopes(mesh, one({1, 0}, Placement::boundary, 1.0), {2.0 * kPi, kPi});
  CHECK(bd.dirichlet == doctest::Approx(16.0 * kPi));
  CHECK(bd.log_boundary == 0.0);
  CHECK(bd.energy == doctest::Approx(-4.0 * kPi));
}

TEST_CASE("asymptotic fits: interior Dirichlet and boundary log slopes") {
  const SurfaceMesh mesh = build_disk_mesh({128, 512});
  const std::vector<double> lambdas{8.0, 16.0, 32.0};
  const auto in = energy_asymptotics(mesh, one({0, 0}, Placement::interior, 1.0), lambdas, unit_potentials(mesh),
                                     {5.0 * kPi, 0.0});
  CHECK(rel(in.dirichlet.slope, 32.0 * kPi) <= 0.03);
  CHECK(std::abs(in.log_boundary.slope + 1.0) <= 0.05);
  CHECK_FALSE(in.predicted_derived);
  const auto bd = energy_asymptotics(mesh, one({1, 0}, Placement::boundary, 1.0), lambdas, unit_potentials(mesh),
                                     {2.0 * kPi, kPi});
  CHECK(std::abs(bd.log_boundary.slope) <= 0.05);
  CHECK(in.samples.size() == 3);
  CHECK(in.samples[1].lambda == 16.0);
}

TEST_CASE("energy slopes do not depend on the zero-mean gauge") {
  // the fit uses the zero-mean field; adding the gauge shift back changes nothing
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  const Params p{5.0 * kPi, 0.0};
  const Potentials unit = unit_potentials(mesh);
  std::vector<double> xs, a, b;
  for (double lambda : {4.0, 8.0, 16.0}) {
    const BubbleField f = bubble_field(mesh, one({0, 0}, Placement::interior, lambda));
    xs.push_back(std::log(lambda));
    a.push_back(energy(mesh, unit, p, f.u).total);
    b.push_back(energy(mesh, unit, p, f.raw()).total);
  }
  CHECK(std::abs(slope_fit(xs, a).slope - slope_fit(xs, b).slope) <= 1e-10 * std::abs(slope_fit(xs, a).slope));
}

TEST_CASE("mixed configuration is flagged as derived") {
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  const BubbleConfig mixed{{{{0, 0}, 0.5, Placement::interior}, {{1, 0}, 0.5, Placement::boundary}}, 1.0, 0.1};
  const auto r = energy_asymptotics(mesh, mixed, std::vector<double>{2.0, 4.0, 8.0}, unit_potentials(mesh),
                                    {5.0 * kPi, 0.0});
  CHECK(r.predicted_derived);
  CHECK(r.predicted.dirichlet == doctest::Approx(48.0 * kPi));
}
