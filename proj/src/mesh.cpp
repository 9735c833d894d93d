#include "meanfield/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "meanfield/error.hpp"

namespace meanfield {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double edge_length(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Triangulates the strip between two concentric rings listed by increasing
// angle, both starting at angle 0. The diagonal choice compares the next
// angles exactly in integers, so the pattern is invariant under rotations
// that map both rings onto themselves.
void stitch_rings(int inner_start, int inner_count, int outer_start, int outer_count,
                  std::vector<Triangle>& triangles) {
  long i = 0;
  long o = 0;
  auto in = [&](long k) { return inner_start + static_cast<int>(k % inner_count); };
  auto out = [&](long k) { return outer_start + static_cast<int>(k % outer_count); };
  while (i < inner_count || o < outer_count) {
    bool advance_inner;
    if (i == inner_count) {
      advance_inner = false;
    } else if (o == outer_count) {
      advance_inner = true;
    } else {
      advance_inner = (i + 1) * outer_count <= (o + 1) * inner_count;
    }
    if (advance_inner) {
      triangles.push_back({in(i), out(o), in(i + 1)});
      ++i;
    } else {
      triangles.push_back({in(i), out(o), out(o + 1)});
      ++o;
    }
  }
}

void add_ring(double radius, int count, std::vector<Point>& vertices) {
  for (int j = 0; j < count; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / count;
    vertices.push_back({radius * std::cos(theta), radius * std::sin(theta)});
  }
}

}  // namespace

void MeshResolution::validate() const {
  if (n_radial < 2 || n_angular < 8) {
    std::ostringstream msg;
    msg << "mesh resolution too coarse: need n_radial >= 2 and n_angular >= 8, got (" << n_radial
        << ", " << n_angular << ")";
    throw MeshError(msg.str());
  }
}

std::string DomainTag::name() const { return kind == DomainKind::disk ? "disk" : "annulus"; }

SparseMatrix assemble_stiffness(std::span<const Point> vertices, std::span<const Triangle> triangles) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(triangles.size() * 9);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    const Point& a = vertices[tri[0]];
    const Point& b = vertices[tri[1]];
    const Point& c = vertices[tri[2]];
    const double area = signed_area(a, b, c);
    if (!(area > 0.0)) {
      std::ostringstream msg;
      msg << "degenerate or inverted triangle " << t << " (" << tri[0] << ", " << tri[1] << ", "
          << tri[2] << "), signed area " << area;
      throw MeshError(msg.str());
    }
    // Edge opposite to each corner; grad(phi_i) is its rotation over 2*area.
    const std::array<Point, 3> opposite = {
        Point{c.x - b.x, c.y - b.y}, Point{a.x - c.x, a.y - c.y}, Point{b.x - a.x, b.y - a.y}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double dot = opposite[i].x * opposite[j].x + opposite[i].y * opposite[j].y;
        entries.emplace_back(tri[i], tri[j], dot / (4.0 * area));
      }
    }
  }
  SparseMatrix stiffness(static_cast<Eigen::Index>(vertices.size()),
                         static_cast<Eigen::Index>(vertices.size()));
  stiffness.setFromTriplets(entries.begin(), entries.end());
  stiffness.makeCompressed();
  return stiffness;
}

SurfaceMesh::SurfaceMesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
                         std::vector<std::vector<int>> boundary_loops, DomainTag tag)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_loops_(std::move(boundary_loops)),
      tag_(tag) {
  const int nv = num_vertices();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) {
        throw MeshError("triangle " + std::to_string(t) + " references vertex " +
                        std::to_string(v) + " out of range");
      }
    }
  }

  stiffness_ = assemble_stiffness(vertices_, triangles_);

  // Directed edges; boundary edges are those without a reversed twin.
  std::set<std::pair<int, int>> directed;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) directed.emplace(tri[k], tri[(k + 1) % 3]);
  }
  std::set<std::pair<int, int>> boundary_edges;
  std::size_t interior_halfedges = 0;
  for (const auto& [a, b] : directed) {
    if (directed.count({b, a}) != 0) {
      ++interior_halfedges;
    } else {
      boundary_edges.emplace(a, b);
    }
  }
  num_edges_ = static_cast<int>(interior_halfedges / 2 + boundary_edges.size());

  boundary_index_.assign(nv, -1);
  std::size_t loop_edges = 0;
  for (std::size_t l = 0; l < boundary_loops_.size(); ++l) {
    const auto& loop = boundary_loops_[l];
    if (loop.size() < 3) throw MeshError("boundary loop " + std::to_string(l) + " has fewer than 3 vertices");
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const int a = loop[k];
      const int b = loop[(k + 1) % loop.size()];
      if (a < 0 || a >= nv) throw MeshError("boundary loop " + std::to_string(l) + " vertex out of range");
      if (boundary_edges.count({a, b}) == 0) {
        throw MeshError("boundary loop " + std::to_string(l) + " edge (" + std::to_string(a) + ", " +
                        std::to_string(b) + ") is not a boundary edge with the domain on its left");
      }
      if (boundary_index_[a] >= 0) throw MeshError("vertex " + std::to_string(a) + " repeated on the boundary");
      boundary_index_[a] = static_cast<int>(boundary_vertices_.size());
      boundary_vertices_.push_back(a);
      ++loop_edges;
    }
  }
  if (loop_edges != boundary_edges.size()) {
    throw MeshError("boundary loops cover " + std::to_string(loop_edges) + " of " +
                    std::to_string(boundary_edges.size()) + " boundary edges");
  }

  vertex_area_ = Field::Zero(nv);
  for (const auto& tri : triangles_) {
    const Point& a = vertices_[tri[0]];
    const Point& b = vertices_[tri[1]];
    const Point& c = vertices_[tri[2]];
    const double third = signed_area(a, b, c) / 3.0;
    for (int v : tri) vertex_area_[v] += third;
    max_edge_ = std::max({max_edge_, edge_length(a, b), edge_length(b, c), edge_length(c, a)});
  }

  boundary_length_ = Field::Zero(num_boundary_vertices());
  for (const auto& loop : boundary_loops_) {
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const int a = loop[k];
      const int b = loop[(k + 1) % loop.size()];
      const Point& pa = vertices_[a];
      const Point& pb = vertices_[b];
      const double chord = edge_length(pa, pb);
      double length = chord;
      const double ra = std::hypot(pa.x, pa.y);
      const double rb = std::hypot(pb.x, pb.y);
      if (ra > 0.0 && std::abs(ra - rb) <= 1e-12 * ra) {
        // Edge of a circle about the origin: weight the arc, and hand the
        // circular segment cut off by the chord to its endpoints (added on an
        // outer circle, removed on a hole).
        const double alpha = 2.0 * std::asin(std::min(1.0, chord / (2.0 * ra)));
        length = ra * alpha;
        const double segment = 0.5 * ra * ra * (alpha - std::sin(alpha));
        const bool outer = signed_area(pa, pb, Point{0.0, 0.0}) > 0.0;
        vertex_area_[a] += (outer ? 0.5 : -0.5) * segment;
        vertex_area_[b] += (outer ? 0.5 : -0.5) * segment;
      }
      boundary_length_[boundary_index_[a]] += 0.5 * length;
      boundary_length_[boundary_index_[b]] += 0.5 * length;
    }
  }
  area_ = vertex_area_.sum();
  perimeter_ = boundary_length_.sum();
}

int SurfaceMesh::nearest_vertex(Point p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < num_vertices(); ++v) {
    const double d = distance(vertices_[v], p);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

double SurfaceMesh::local_mesh_size(Point p) const {
  const int v = nearest_vertex(p);
  double h = 0.0;
  for (const auto& tri : triangles_) {
    if (tri[0] != v && tri[1] != v && tri[2] != v) continue;
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, edge_length(vertices_[tri[k]], vertices_[tri[(k + 1) % 3]]));
    }
  }
  return h;
}

std::vector<int> SurfaceMesh::neighbours(int vertex) const {
  std::vector<int> result;
  for (SparseMatrix::InnerIterator it(stiffness_, vertex); it; ++it) {
    if (it.col() != vertex) result.push_back(static_cast<int>(it.col()));
  }
  return result;
}

Field SurfaceMesh::boundary_values(const Field& u) const {
  Field b(num_boundary_vertices());
  for (int k = 0; k < num_boundary_vertices(); ++k) b[k] = u[boundary_vertices_[k]];
  return b;
}

namespace {

// Center vertex, rings at the given radii with the given counts, a fan to the
// first ring and stitched strips between consecutive rings.
SurfaceMesh polar_disk(const std::vector<double>& radii, const std::vector<int>& counts) {
  std::vector<Point> vertices{{0.0, 0.0}};
  std::vector<int> ring_start(radii.size(), 0);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    ring_start[k] = static_cast<int>(vertices.size());
    add_ring(radii[k], counts[k], vertices);
  }

  std::vector<Triangle> triangles;
  for (int j = 0; j < counts[0]; ++j) {
    triangles.push_back({0, ring_start[0] + j, ring_start[0] + (j + 1) % counts[0]});
  }
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    stitch_rings(ring_start[k], counts[k], ring_start[k + 1], counts[k + 1], triangles);
  }

  std::vector<int> outer(counts.back());
  for (int j = 0; j < counts.back(); ++j) outer[j] = ring_start.back() + j;
  return SurfaceMesh(std::move(vertices), std::move(triangles), {std::move(outer)},
                     DomainTag{DomainKind::disk, 0.0});
}

int even_count(double ideal) { return 2 * static_cast<int>(std::lround(ideal / 2.0)); }

}  // namespace

SurfaceMesh build_disk_mesh(const MeshResolution& res) {
  res.validate();
  std::vector<int> counts(res.n_radial, 0);
  std::vector<double> radii(res.n_radial, 0.0);
  counts.back() = res.n_angular;
  for (int k = res.n_radial; k >= 1; --k) {
    radii[k - 1] = static_cast<double>(k) / res.n_radial;
    if (k == res.n_radial) continue;
    const double ideal = static_cast<double>(res.n_angular) * k / res.n_radial;
    counts[k - 1] = std::clamp(even_count(ideal), 6, counts[k]);
  }
  return polar_disk(radii, counts);
}

void RefinedDiskSpec::validate() const {
  const bool ok = center_spacing > 0.0 && boundary_spacing > 0.0 && max_spacing > 0.0 && max_spacing <= 0.5 &&
                  growth > 1.0 && growth <= 2.0;
  if (!ok) {
    std::ostringstream msg;
    msg << "refined disk spacings must be positive with max_spacing <= 0.5 and growth in (1, 2]; got center "
        << center_spacing << ", boundary " << boundary_spacing << ", max " << max_spacing << ", growth " << growth;
    throw MeshError(msg.str());
  }
}

SurfaceMesh build_refined_disk_mesh(const RefinedDiskSpec& spec) {
  spec.validate();
  const double slope = spec.growth - 1.0;
  auto spacing = [&](double r) {
    return std::min({spec.max_spacing, spec.center_spacing + slope * r, spec.boundary_spacing + slope * (1.0 - r)});
  };
  std::vector<double> radii;
  double r = spacing(0.0);
  while (1.0 - r > 1.5 * spacing(r)) {
    radii.push_back(r);
    r += spacing(r);
  }
  radii.push_back(1.0);

  std::vector<int> counts(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    counts[k] = std::max(6, even_count(2.0 * std::numbers::pi * radii[k] / spacing(radii[k])));
    if (k > 0) counts[k] = std::max(counts[k], counts[k - 1]);
  }
  return polar_disk(radii, counts);
}

SurfaceMesh build_annulus_mesh(double r_inner, const MeshResolution& res) {
  if (!(r_inner > 0.0 && r_inner < 1.0)) {
    throw MeshError("annulus inner radius must lie in (0, 1), got " + std::to_string(r_inner));
  }
  res.validate();
  const int n = res.n_angular;
  std::vector<Point> vertices;
  for (int k = 0; k <= res.n_radial; ++k) {
    add_ring(r_inner + (1.0 - r_inner) * k / res.n_radial, n, vertices);
  }
  std::vector<Triangle> triangles;
  for (int k = 0; k < res.n_radial; ++k) stitch_rings(k * n, n, (k + 1) * n, n, triangles);

  std::vector<int> outer(n);
  std::vector<int> inner(n);
  for (int j = 0; j < n; ++j) {
    outer[j] = res.n_radial * n + j;
    inner[j] = (n - j) % n;  // clockwise, hole on the right
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles), {std::move(outer), std::move(inner)},
                     DomainTag{DomainKind::annulus, r_inner});
}

double integrate_interior(const SurfaceMesh& mesh, const Field& values) {
  if (values.size() != mesh.num_vertices()) {
    throw FieldError("interior integrand has " + std::to_string(values.size()) + " entries, mesh has " +
                     std::to_string(mesh.num_vertices()) + " vertices");
  }
  return mesh.vertex_area().dot(values);
}

double integrate_boundary(const SurfaceMesh& mesh, const Field& values) {
  if (values.size() != mesh.num_boundary_vertices()) {
    throw FieldError("boundary integrand has " + std::to_string(values.size()) + " entries, mesh has " +
                     std::to_string(mesh.num_boundary_vertices()) + " boundary vertices");
  }
  return mesh.boundary_length().dot(values);
}

double distance(Point x, Point p) { return std::hypot(x.x - p.x, x.y - p.y); }

double distance(const SurfaceMesh& /*mesh*/, Point x, Point p) { return distance(x, p); }

void write_mesh_dump(const SurfaceMesh& mesh, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "[vertices]\n";
  for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
  out << "[triangles]\n";
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "[boundary]\n";
  for (const auto& loop : mesh.boundary_loops()) {
    for (std::size_t k = 0; k < loop.size(); ++k) out << (k ? " " : "") << loop[k];
    out << '\n';
  }
  out.precision(old_precision);
}

SurfaceMesh read_mesh_dump(std::istream& in, DomainTag tag) {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::vector<int>> loops;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    std::istringstream fields(line);
    bool ok = true;
    if (section == "[vertices]") {
      Point p;
      ok = static_cast<bool>(fields >> p.x >> p.y);
      vertices.push_back(p);
    } else if (section == "[triangles]") {
      Triangle t;
      ok = static_cast<bool>(fields >> t[0] >> t[1] >> t[2]);
      triangles.push_back(t);
    } else if (section == "[boundary]") {
      std::vector<int> loop;
      for (int v; fields >> v;) loop.push_back(v);
      ok = !loop.empty();
      loops.push_back(std::move(loop));
    } else {
      ok = false;
    }
    if (!ok) throw MeshError("mesh dump: malformed record at line " + std::to_string(line_no));
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles), std::move(loops), tag);
}

}  // namespace meanfield
