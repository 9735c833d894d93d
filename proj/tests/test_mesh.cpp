#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "meanfield/error.hpp"
#include "meanfield/mesh.hpp"

using namespace meanfield;
using testing::boundary_field;
using testing::vertex_field;

namespace {

constexpr double kPi = std::numbers::pi;

double quad_form(const SurfaceMesh& mesh, const Field& u) { return u.dot(mesh.stiffness() * u); }

void check_structure(const SurfaceMesh& mesh) {
  const SparseMatrix& s = mesh.stiffness();
  const Field row_sums = s * Field::Ones(mesh.num_vertices());
  CHECK(row_sums.cwiseAbs().maxCoeff() <= 1e-12);
  const SparseMatrix diff = SparseMatrix(s.transpose()) - s;
  CHECK(diff.norm() <= 1e-12 * s.norm());
  CHECK(mesh.vertex_area().minCoeff() > 0.0);
  CHECK(mesh.boundary_length().minCoeff() > 0.0);
  for (const auto& t : mesh.triangles()) {
    const Point a = mesh.vertices()[t[0]], b = mesh.vertices()[t[1]], c = mesh.vertices()[t[2]];
    CHECK((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) > 0.0);
  }
}

}  // namespace

TEST_CASE("disk mesh area, perimeter and topology") {
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  CHECK(std::abs(mesh.vertex_area().sum() - kPi) / kPi <= 1e-3);
  CHECK(std::abs(mesh.boundary_length().sum() - 2.0 * kPi) / (2.0 * kPi) <= 1e-3);
  CHECK(mesh.area() == doctest::Approx(mesh.vertex_area().sum()).epsilon(1e-14));
  CHECK(mesh.perimeter() == doctest::Approx(mesh.boundary_length().sum()).epsilon(1e-14));
  CHECK(mesh.boundary_loops().size() == 1);
  CHECK(mesh.num_boundary_vertices() == 256);
  check_structure(mesh);
}

TEST_CASE("disk Euler characteristic is one at every resolution") {
  for (MeshResolution res : {MeshResolution{2, 8}, {3, 12}, {8, 32}, {16, 64}, {5, 41}}) {
    CHECK(build_disk_mesh(res).euler_characteristic() == 1);
  }
}

TEST_CASE("curved weights integrate constants exactly") {
  const SurfaceMesh disk = build_disk_mesh({8, 32});
  CHECK(disk.area() == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(disk.perimeter() == doctest::Approx(2.0 * kPi).epsilon(1e-13));
  const SurfaceMesh ring = build_annulus_mesh(0.5, {8, 64});
  CHECK(ring.area() == doctest::Approx(0.75 * kPi).epsilon(1e-13));
  CHECK(ring.perimeter() == doctest::Approx(3.0 * kPi).epsilon(1e-13));
}

TEST_CASE("annulus mesh") {
  const SurfaceMesh mesh = build_annulus_mesh(0.5, {32, 256});
  CHECK(std::abs(mesh.area() - 0.75 * kPi) / (0.75 * kPi) <= 1e-3);
  CHECK(std::abs(mesh.perimeter() - 3.0 * kPi) / (3.0 * kPi) <= 1e-3);
  CHECK(mesh.boundary_loops().size() == 2);
  CHECK(mesh.euler_characteristic() == 0);
  CHECK(mesh.domain().kind == DomainKind::annulus);
  check_structure(mesh);
}

TEST_CASE("refined disk mesh") {
  const SurfaceMesh mesh = build_refined_disk_mesh({1e-3, 2e-3, 0.05, 1.2});
  CHECK(mesh.euler_characteristic() == 1);
  CHECK(mesh.area() == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(mesh.local_mesh_size({0, 0}) < 5e-3);
  CHECK(mesh.local_mesh_size({1, 0}) < 1e-2);
  CHECK(mesh.local_mesh_size({0.5, 0}) > 2e-2);
  check_structure(mesh);
  CHECK_THROWS_AS(build_refined_disk_mesh({0.0, 0.01, 0.05, 1.1}), MeshError);
  CHECK_THROWS_AS(build_refined_disk_mesh({0.01, 0.01, 0.05, 1.0}), MeshError);
}

TEST_CASE("invalid resolutions are rejected") {
  CHECK_THROWS_AS(build_disk_mesh({1, 64}), MeshError);
  CHECK_THROWS_AS(build_disk_mesh({16, 7}), MeshError);
  CHECK_THROWS_AS(build_annulus_mesh(0.5, {1, 64}), MeshError);
  CHECK_THROWS_AS(build_annulus_mesh(1.0, {8, 64}), MeshError);
  CHECK_THROWS_AS(build_annulus_mesh(0.0, {8, 64}), MeshError);
}

TEST_CASE("stiffness on linear and constant fields") {
  const SurfaceMesh mesh = build_disk_mesh({16, 64});
  // exact on linears: the polygonal area, i.e. the sum of triangle areas
  double polygon = 0.0;
  for (const auto& t : mesh.triangles()) {
    const Point a = mesh.vertices()[t[0]], b = mesh.vertices()[t[1]], c = mesh.vertices()[t[2]];
    polygon += 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  }
  const Field x = vertex_field(mesh, [](Point p) { return p.x; });
  CHECK(quad_form(mesh, x) == doctest::Approx(polygon).epsilon(1e-12));
  CHECK(std::abs(quad_form(mesh, Field::Constant(mesh.num_vertices(), 3.7))) <= 1e-10);
}

TEST_CASE("stiffness on x^2 converges at second order") {
  std::vector<double> errors;
  for (MeshResolution res : {MeshResolution{16, 64}, {32, 128}, {64, 256}}) {
    const SurfaceMesh mesh = build_disk_mesh(res);
    const Field u = vertex_field(mesh, [](Point p) { return p.x * p.x; });
    errors.push_back(std::abs(quad_form(mesh, u) - kPi));
  }
  CHECK(errors[2] <= 1e-2);
  CHECK(errors[0] / errors[1] >= 3.5);
  CHECK(errors[1] / errors[2] >= 3.5);
}

TEST_CASE("stiffness kernel is one-dimensional") {
  // u^T S u > 0 for every non-constant probe
  const SurfaceMesh mesh = build_annulus_mesh(0.4, {6, 24});
  for (int seed = 0; seed < 20; ++seed) {
    Field u = testing::random_field(mesh.num_vertices(), -1.0, 1.0, seed);
    u.array() -= u.mean();
    CHECK(quad_form(mesh, u) > 0.0);
  }
}

TEST_CASE("lumped integrals") {
  const SurfaceMesh mesh = build_disk_mesh({64, 256});
  const Field x = vertex_field(mesh, [](Point p) { return p.x; });
  CHECK(std::abs(integrate_interior(mesh, x)) <= 1e-10 * mesh.area());
  const Field x2 = boundary_field(mesh, [](Point p) { return p.x * p.x; });
  CHECK(integrate_boundary(mesh, x2) == doctest::Approx(kPi).epsilon(1e-3));
  CHECK(integrate_interior(mesh, Field::Ones(mesh.num_vertices())) == doctest::Approx(mesh.area()));
  CHECK(integrate_boundary(mesh, Field::Ones(mesh.num_boundary_vertices())) == doctest::Approx(mesh.perimeter()));
  CHECK_THROWS(integrate_interior(mesh, Field::Ones(3)));
}

TEST_CASE("distance") {
  const SurfaceMesh ring = build_annulus_mesh(0.5, {4, 32});
  CHECK(distance({0.3, 0.4}, {0.3, 0.4}) == 0.0);
  CHECK(distance({0, 0}, {1, 0}) == 1.0);
  CHECK(distance(ring, {1, 0}, {-1, 0}) == 2.0);
}

TEST_CASE("mesh queries") {
  const SurfaceMesh mesh = build_disk_mesh({8, 32});
  const int center = mesh.nearest_vertex({0, 0});
  CHECK(mesh.vertices()[center].x == 0.0);
  CHECK(mesh.vertices()[center].y == 0.0);
  CHECK_FALSE(mesh.on_boundary(center));
  const int rim = mesh.nearest_vertex({1.2, 0.0});
  CHECK(mesh.on_boundary(rim));
  CHECK(mesh.boundary_vertices()[mesh.boundary_index(rim)] == rim);
  const auto nb = mesh.neighbours(center);
  CHECK(std::is_sorted(nb.begin(), nb.end()));
  CHECK(std::find(nb.begin(), nb.end(), center) == nb.end());
  const Field u = vertex_field(mesh, [](Point p) { return p.x + 2.0 * p.y; });
  const Field b = mesh.boundary_values(u);
  for (int k = 0; k < mesh.num_boundary_vertices(); ++k) CHECK(b[k] == u[mesh.boundary_vertices()[k]]);
}

TEST_CASE("mesh dump round trip") {
  const SurfaceMesh mesh = build_annulus_mesh(0.5, {4, 16});
  std::stringstream s;
  write_mesh_dump(mesh, s);
  const SurfaceMesh back = read_mesh_dump(s, mesh.domain());
  REQUIRE(back.num_vertices() == mesh.num_vertices());
  CHECK(back.num_triangles() == mesh.num_triangles());
  CHECK(back.boundary_loops() == mesh.boundary_loops());
  CHECK((back.vertex_area() - mesh.vertex_area()).cwiseAbs().maxCoeff() == 0.0);
  std::stringstream again;
  write_mesh_dump(back, again);
  std::stringstream first;
  write_mesh_dump(mesh, first);
  CHECK(again.str() == first.str());
}

TEST_CASE("malformed meshes are rejected") {
  const std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}};
  CHECK_NOTHROW(SurfaceMesh(v, {{0, 1, 2}}, {{0, 1, 2}}, DomainTag{}));
  CHECK_THROWS_AS(SurfaceMesh(v, {{0, 2, 1}}, {{0, 2, 1}}, DomainTag{}), MeshError);  // clockwise
  CHECK_THROWS_AS(SurfaceMesh(v, {{0, 1, 5}}, {{0, 1, 5}}, DomainTag{}), MeshError);  // index out of range
  CHECK_THROWS_AS(SurfaceMesh(v, {{0, 1, 2}}, {{0, 2, 1}}, DomainTag{}), MeshError);  // loop orientation
  const std::vector<Point> flat{{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(SurfaceMesh(flat, {{0, 1, 2}}, {{0, 1, 2}}, DomainTag{}), MeshError);
  std::stringstream bad("[vertices]\n0 0\n1 zero\n");
  CHECK_THROWS_AS(read_mesh_dump(bad, DomainTag{}), MeshError);
}
