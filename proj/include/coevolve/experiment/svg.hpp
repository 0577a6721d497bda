#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace coevolve::experiment {

enum class PlotKind { loglog, series };

PlotKind parse_plot_kind(std::string_view name);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Numeric columns after the first become series against the first column;
/// text columns are skipped and empty cells are missing points.
std::vector<PlotSeries> read_plot_csv(std::string_view csv);

/// Standalone SVG with one polyline per series; the output depends only on
/// the input, byte for byte.
std::string render_svg(const std::vector<PlotSeries>& series, PlotKind kind,
                       std::string_view title);

/// Renders `csv_path` next to itself with extension .svg and returns the path.
std::filesystem::path emit_svg(const std::filesystem::path& csv_path, PlotKind kind);

}  // namespace coevolve::experiment
