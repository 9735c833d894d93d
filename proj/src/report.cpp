#include "meanfield/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "meanfield/error.hpp"

namespace meanfield {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Json to_json(const EnergyBreakdown& e) {
  return Json{{"dirichlet", e.dirichlet},
              {"linear", e.linear},
              {"log_interior", e.log_interior},
              {"log_boundary", e.log_boundary},
              {"total", e.total}};
}

Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"message", r.message},
              {"residual", r.residual},
              {"initial_energy", to_json(r.initial_energy)},
              {"final_energy", to_json(r.final_energy)}};
}

Json to_json(const SlopeFit& f) {
  return Json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"max_residual", f.max_residual},
              {"lambda_range", Json::array({f.lambda_range.first, f.lambda_range.second})}};
}

Json to_json(const QuantitySlopes& s) {
  return Json{{"dirichlet", s.dirichlet},
              {"log_interior", s.log_interior},
              {"log_boundary", s.log_boundary},
              {"integral", s.integral},
              {"energy", s.energy}};
}

Json to_json(const ParamClass& c) {
  Json j{{"N", c.N},
         {"M", c.M},
         {"region", to_string(c.region)},
         {"existence", to_string(c.existence)},
         {"on_critical_set", c.on_critical_set},
         {"critical_condition", c.critical_condition()}};
  Json ranks = Json::array();
  for (const auto& e : c.betti.ranks) ranks.push_back(Json{{"q", e.q}, {"rank", e.rank}});
  j["betti"] = Json{{"ranks", ranks}, {"degenerate_binomial", c.betti.degenerate_binomial}};
  return j;
}

Json to_json(const SurfaceTopology& t) {
  return Json{{"genus", t.genus}, {"boundary_components", t.boundary_components},
              {"simply_connected", t.simply_connected}};
}

Json mesh_summary(const SurfaceMesh& mesh) {
  return Json{{"domain", mesh.domain().name()},
              {"vertices", mesh.num_vertices()},
              {"triangles", mesh.num_triangles()},
              {"edges", mesh.num_edges()},
              {"boundary_vertices", mesh.num_boundary_vertices()},
              {"boundary_loops", mesh.boundary_loops().size()},
              {"euler_characteristic", mesh.euler_characteristic()},
              {"area", mesh.area()},
              {"perimeter", mesh.perimeter()},
              {"max_edge_length", mesh.max_edge_length()},
              {"topology", to_json(topology_of(mesh))}};
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ArgumentError("CSV row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += csv_quote(cells[i]);
  }
  text_ += '\n';
}

void CsvWriter::close() { write_text_file(path_, text_); }

void write_history_csv(const SolveReport& r, const std::filesystem::path& path) {
  CsvWriter csv(path, {"iteration", "grad_norm", "energy", "step"});
  for (std::size_t i = 0; i < r.grad_norm_history.size(); ++i) {
    csv.row({std::to_string(i), format_number(r.grad_norm_history[i]), format_number(r.energy_history[i]),
             i < r.step_history.size() ? format_number(r.step_history[i]) : ""});
  }
  csv.close();
}

Rgb diverging_color(int index) {
  index = std::clamp(index, 0, 255);
  const double t = index / 255.0;
  const Rgb lo{59, 76, 192};
  const Rgb mid{221, 221, 221};
  const Rgb hi{180, 4, 38};
  auto mix = [](const Rgb& a, const Rgb& b, double s) {
    return Rgb{static_cast<int>(std::lround(a.r + s * (b.r - a.r))),
               static_cast<int>(std::lround(a.g + s * (b.g - a.g))),
               static_cast<int>(std::lround(a.b + s * (b.b - a.b)))};
  };
  return t < 0.5 ? mix(lo, mid, 2.0 * t) : mix(mid, hi, 2.0 * t - 1.0);
}

int color_index(double value, double lo, double hi) {
  if (!(hi > lo)) return 128;
  const double s = (value - lo) / (hi - lo);
  return std::clamp(static_cast<int>(std::floor(s * 256.0)), 0, 255);
}

std::vector<int> heatmap_indices(const SurfaceMesh& mesh, const Field& field, const ColorScale& scale) {
  if (field.size() != mesh.num_vertices()) {
    throw FieldError("heatmap field has " + std::to_string(field.size()) + " values for " +
                     std::to_string(mesh.num_vertices()) + " vertices");
  }
  const double lo = scale.min.value_or(field.minCoeff());
  const double hi = scale.max.value_or(field.maxCoeff());
  std::vector<int> out;
  out.reserve(mesh.num_triangles());
  for (const auto& t : mesh.triangles()) {
    out.push_back(color_index((field[t[0]] + field[t[1]] + field[t[2]]) / 3.0, lo, hi));
  }
  return out;
}

void write_svg_heatmap(const SurfaceMesh& mesh, const Field& field, const std::filesystem::path& path,
                       const ColorScale& scale) {
  const std::vector<int> indices = heatmap_indices(mesh, field, scale);
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  bool first = true;
  for (const auto& p : mesh.vertices()) {
    if (first) {
      xmin = xmax = p.x;
      ymin = ymax = p.y;
      first = false;
    }
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  constexpr double kSize = 512.0;
  constexpr double kMargin = 8.0;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-300});
  const double scale_px = (kSize - 2.0 * kMargin) / span;

  std::string text;
  text.reserve(64 * indices.size() + 256);
  char buf[128];
  text += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" viewBox=\"0 0 512 512\">\n";
  text += "<rect width=\"512\" height=\"512\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Rgb c = diverging_color(indices[k]);
    text += "<polygon points=\"";
    for (int i = 0; i < 3; ++i) {
      const Point& p = mesh.vertices()[mesh.triangles()[k][i]];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", kMargin + (p.x - xmin) * scale_px,
                    kSize - kMargin - (p.y - ymin) * scale_px);
      text += buf;
    }
    std::snprintf(buf, sizeof buf, "\" fill=\"#%02x%02x%02x\"/>\n", c.r, c.g, c.b);
    text += buf;
  }
  text += "</svg>\n";
  write_text_file(path, text);
}

}  // namespace meanfield
