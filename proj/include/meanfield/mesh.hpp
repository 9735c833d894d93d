#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace meanfield {

using Field = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<int, 3>;

struct MeshResolution {
  int n_radial = 0;
  int n_angular = 0;

  /// Throws MeshError unless n_radial >= 2 and n_angular >= 8.
  void validate() const;
};

enum class DomainKind { disk, annulus };

struct DomainTag {
  DomainKind kind = DomainKind::disk;
  double r_inner = 0.0;  // annulus only

  std::string name() const;
};

/// Flat triangulated domain with boundary. Immutable once constructed; the
/// lumped quadrature weights and the cotangent stiffness matrix are computed
/// by the constructor.
class SurfaceMesh {
 public:
  /// Boundary loops are ordered cycles with the domain on the left. Throws
  /// MeshError on out-of-range indices, degenerate or clockwise triangles,
  /// or boundary loops that do not match the triangle boundary edges.
  SurfaceMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
              std::vector<std::vector<int>> boundary_loops, DomainTag tag);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_boundary_vertices() const { return static_cast<int>(boundary_vertices_.size()); }
  int num_edges() const { return num_edges_; }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const std::vector<std::vector<int>>& boundary_loops() const { return boundary_loops_; }

  /// Boundary vertices in loop order; boundary-indexed arrays use this order.
  std::span<const int> boundary_vertices() const { return boundary_vertices_; }
  /// Position of `vertex` in boundary_vertices(), or -1 for interior vertices.
  int boundary_index(int vertex) const { return boundary_index_[vertex]; }
  bool on_boundary(int vertex) const { return boundary_index_[vertex] >= 0; }

  /// Lumped area weight per vertex: one third of each incident triangle.
  /// Boundary edges whose endpoints lie on one circle about the origin also
  /// pass half of the circular segment between chord and arc to each end, so
  /// disk and annulus weights integrate constants over the curved domain.
  const Field& vertex_area() const { return vertex_area_; }
  /// Lumped length weight per boundary vertex: half of each incident edge,
  /// measured along the arc for circular edges as above.
  const Field& boundary_length() const { return boundary_length_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  /// Diagonal of the lumped mass matrix, same as vertex_area().
  const Field& lumped_mass() const { return vertex_area_; }

  double area() const { return area_; }
  double perimeter() const { return perimeter_; }
  const DomainTag& domain() const { return tag_; }

  /// Longest edge over all triangles.
  double max_edge_length() const { return max_edge_; }
  /// Longest edge among triangles incident to the vertex nearest to `p`.
  double local_mesh_size(Point p) const;
  int nearest_vertex(Point p) const;
  /// Vertex neighbours (from the stiffness sparsity pattern), sorted.
  std::vector<int> neighbours(int vertex) const;

  /// Boundary-indexed restriction of a vertex field.
  Field boundary_values(const Field& u) const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::vector<int>> boundary_loops_;
  std::vector<int> boundary_vertices_;
  std::vector<int> boundary_index_;
  Field vertex_area_;
  Field boundary_length_;
  SparseMatrix stiffness_;
  DomainTag tag_;
  double area_ = 0.0;
  double perimeter_ = 0.0;
  double max_edge_ = 0.0;
  int num_edges_ = 0;
};

/// Structured polar triangulation of the unit disk: a fan around the center
/// followed by rings whose vertex counts grow linearly with the radius so the
/// triangles stay near-uniform. The outer ring has exactly n_angular vertices.
SurfaceMesh build_disk_mesh(const MeshResolution& res);

/// Radial grading for build_refined_disk_mesh. Ring spacing follows
/// h(r) = min(max_spacing, center_spacing + (growth - 1) r,
///            boundary_spacing + (growth - 1)(1 - r))
/// and each ring carries about 2 pi r / h(r) vertices.
struct RefinedDiskSpec {
  double center_spacing = 0.01;
  double boundary_spacing = 0.01;
  double max_spacing = 0.05;
  double growth = 1.1;

  void validate() const;
};

/// Polar disk mesh refined geometrically towards the center and the rim, for
/// bubbles far narrower than a uniform mesh can resolve.
SurfaceMesh build_refined_disk_mesh(const RefinedDiskSpec& spec);

/// Structured triangulation of {r_inner <= |x| <= 1}; every ring carries
/// n_angular vertices.
SurfaceMesh build_annulus_mesh(double r_inner, const MeshResolution& res);

/// Cotangent (P1) stiffness matrix. Throws MeshError naming the first
/// triangle with non-positive signed area.
SparseMatrix assemble_stiffness(std::span<const Point> vertices, std::span<const Triangle> triangles);

/// Lumped quadrature of per-vertex values over the domain.
double integrate_interior(const SurfaceMesh& mesh, const Field& values);
/// Lumped quadrature of per-boundary-vertex values over the boundary.
double integrate_boundary(const SurfaceMesh& mesh, const Field& values);

/// Ambient Euclidean distance; chordal on the annulus.
double distance(const SurfaceMesh& mesh, Point x, Point p);
double distance(Point x, Point p);

/// Plain-text dump with [vertices], [triangles] and [boundary] sections.
void write_mesh_dump(const SurfaceMesh& mesh, std::ostream& out);
SurfaceMesh read_mesh_dump(std::istream& in, DomainTag tag);

}  // namespace meanfield
