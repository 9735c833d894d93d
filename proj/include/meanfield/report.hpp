#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "meanfield/analysis.hpp"
#include "meanfield/bubbles.hpp"
#include "meanfield/functional.hpp"
#include "meanfield/mesh.hpp"
#include "meanfield/solver.hpp"

namespace meanfield {

using Json = nlohmann::ordered_json;

Json to_json(const EnergyBreakdown& e);
/// Summary fields only; the per-iteration series go to CSV.
Json to_json(const SolveReport& r);
Json to_json(const SlopeFit& f);
Json to_json(const QuantitySlopes& s);
Json to_json(const ParamClass& c);
Json to_json(const SurfaceTopology& t);
Json mesh_summary(const SurfaceMesh& mesh);

/// Columns: iteration, grad_norm, energy, step (step is empty on the last row).
void write_history_csv(const SolveReport& r, const std::filesystem::path& path);

/// Minimal CSV writer: header row, then rows of formatted cells (quoted as needed).
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  /// Writes the accumulated rows; throws IoError on failure.
  void close();

 private:
  std::filesystem::path path_;
  std::string text_;
  std::size_t columns_;
};

/// Quotes a cell when it contains a comma, quote or newline.
std::string csv_quote(const std::string& cell);

/// Shortest round-trip decimal text for a double.
std::string format_number(double value);

void write_text_file(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// SVG heatmap
// ---------------------------------------------------------------------------

struct ColorScale {
  std::optional<double> min;  // defaults to the field minimum
  std::optional<double> max;  // defaults to the field maximum
};

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
};

/// 256-step diverging map: blue (59, 76, 192) through light grey
/// (221, 221, 221) to red (180, 4, 38), linear in each half.
Rgb diverging_color(int index);

/// Color index of `value` on [lo, hi]; 128 when the range is degenerate.
int color_index(double value, double lo, double hi);

/// One polygon per triangle, filled by the mean of its vertex values.
/// Throws FieldError on a size mismatch and IoError on an unwritable path.
void write_svg_heatmap(const SurfaceMesh& mesh, const Field& field, const std::filesystem::path& path,
                       const ColorScale& scale = {});

/// Triangle color indices as written by write_svg_heatmap (for tests).
std::vector<int> heatmap_indices(const SurfaceMesh& mesh, const Field& field, const ColorScale& scale = {});

}  // namespace meanfield
