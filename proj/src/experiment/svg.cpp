#include "coevolve/experiment/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "coevolve/error.hpp"

namespace coevolve::experiment {

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "loglog") return PlotKind::loglog;
  if (name == "series") return PlotKind::series;
  throw ConfigError(fmt::format("unknown plot kind '{}' (expected loglog or series)", name));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_cell(const std::string& cell, double& value) {
  try {
    std::size_t used = 0;
    value = std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::vector<PlotSeries> read_plot_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  if (rows.empty()) throw ValidationError("plot CSV has no header");
  const auto& header = rows.front();
  if (header.size() < 2) throw ValidationError("plot CSV needs an x column and a series");
  if (rows.size() < 2) throw ValidationError("plot CSV has no data rows");
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != header.size())
      throw ValidationError(fmt::format("plot CSV line {} has {} cells, expected {}", r + 1,
                                        rows[r].size(), header.size()));

  std::vector<double> x;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    double v = 0.0;
    if (!parse_cell(rows[r][0], v) || !std::isfinite(v))
      throw ValidationError(
          fmt::format("plot CSV line {}: x value '{}' is not a number", r + 1, rows[r][0]));
    x.push_back(v);
  }
  std::vector<PlotSeries> series;
  for (std::size_t c = 1; c < header.size(); ++c) {
    PlotSeries s{header[c], {}, {}};
    bool numeric = true;
    for (std::size_t r = 1; r < rows.size() && numeric; ++r) {
      if (rows[r][c].empty()) continue;
      double v = 0.0;
      if (!parse_cell(rows[r][c], v)) {
        numeric = false;
        break;
      }
      if (std::isfinite(v)) {
        s.x.push_back(x[r - 1]);
        s.y.push_back(v);
      }
    }
    if (numeric) series.push_back(std::move(s));
  }
  if (series.empty()) throw ValidationError("plot CSV has no numeric series");
  return series;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
  double lo;
  double hi;
  bool log;
  std::vector<double> ticks;  // in data units

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    return (t - a) / (b - a);
  }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis axis{lo, hi, log, {}};
  if (log) {
    double a = std::floor(std::log10(lo));
    double b = std::ceil(std::log10(hi));
    if (a == b) {
      a -= 1.0;
      b += 1.0;
    }
    axis.lo = std::pow(10.0, a);
    axis.hi = std::pow(10.0, b);
    for (double e = a; e <= b; e += 1.0) axis.ticks.push_back(std::pow(10.0, e));
  } else {
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
    for (int k = 0; k <= 5; ++k) axis.ticks.push_back(axis.lo + (axis.hi - axis.lo) * k / 5.0);
  }
  return axis;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, PlotKind kind,
                       std::string_view title) {
  const bool log = kind == PlotKind::loglog;
  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const auto& s : series)
    for (std::size_t p = 0; p < s.x.size(); ++p) {
      if (log && (s.x[p] <= 0.0 || s.y[p] <= 0.0))
        throw ValidationError(fmt::format(
            "log-log plot needs positive data; series '{}' has ({}, {})", s.name, s.x[p], s.y[p]));
      xmin = std::min(xmin, s.x[p]);
      xmax = std::max(xmax, s.x[p]);
      ymin = std::min(ymin, s.y[p]);
      ymax = std::max(ymax, s.y[p]);
    }
  if (!(xmin <= xmax)) throw ValidationError("plot has no finite data points");
  const Axis ax = make_axis(xmin, xmax, log);
  const Axis ay = make_axis(ymin, ymax, log);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  const auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n",
      kWidth, kHeight);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format(
      "<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" "
      "text-anchor=\"middle\">{}</text>\n",
      kLeft + pw / 2.0, escape(title));
  for (double t : ax.ticks) {
    const double x = px(t);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#dddddd\"/>\n",
        x, kTop, kTop + ph);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
        "text-anchor=\"middle\">{:.3g}</text>\n",
        x, kTop + ph + 14.0, t);
  }
  for (double t : ay.ticks) {
    const double y = py(t);
    out += fmt::format(
        "<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#dddddd\"/>\n",
        y, kLeft, kLeft + pw);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" "
        "text-anchor=\"end\">{:.3g}</text>\n",
        kLeft - 6.0, y + 3.0, t);
  }
  out += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, pw, ph);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    if (s.x.empty()) continue;
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t p = 0; p < s.x.size(); ++p)
      points += fmt::format("{}{:.2f},{:.2f}", p ? " " : "", px(s.x[p]), py(s.y[p]));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       colour, points);
    const double ly = kTop + 14.0 * static_cast<double>(k) + 8.0;
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "fill=\"{}\">{}</text>\n",
        kLeft + pw + 10.0, ly, colour, escape(s.name));
  }
  out += "</svg>\n";
  return out;
}

std::filesystem::path emit_svg(const std::filesystem::path& csv_path, PlotKind kind) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot read '{}'", csv_path.string()));
  const std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string svg =
      render_svg(read_plot_csv(csv), kind, csv_path.filename().string());
  std::filesystem::path out_path = csv_path;
  out_path.replace_extension(".svg");
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", out_path.string()));
  out << svg;
  return out_path;
}

}  // namespace coevolve::experiment
