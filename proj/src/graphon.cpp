#include "coevolve/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "coevolve/error.hpp"
#include "coevolve/quadrature.hpp"

namespace coevolve {

WeightMatrix::WeightMatrix(std::vector<double> nodes,
                           std::vector<double> entries)
    : nodes_(std::move(nodes)), entries_(std::move(entries)) {
  const std::size_t n = nodes_.size();
  if (n == 0) throw ShapeError("weight matrix needs at least one node");
  if (entries_.size() != n * n)
    throw ShapeError(fmt::format("weight matrix with {} nodes needs {} entries",
                                 n, n * n));
  for (std::size_t k = 0; k < n; ++k) {
    if (!(nodes_[k] >= 0.0 && nodes_[k] < 1.0))
      throw ValidationError(fmt::format("node {} outside [0, 1)", nodes_[k]));
    if (k > 0 && !(nodes_[k] > nodes_[k - 1]))
      throw ValidationError("weight matrix nodes must be strictly increasing");
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < k; ++l) {
      const double a = entries_[k * n + l];
      const double b = entries_[l * n + k];
      if (!std::isfinite(a) || !std::isfinite(b))
        throw ValidationError("weight matrix entry not finite");
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ValidationError(
            fmt::format("weight matrix not symmetric at ({}, {}): {} vs {}", k,
                        l, a, b));
    }
    if (!std::isfinite(entries_[k * n + k]))
      throw ValidationError("weight matrix entry not finite");
  }
}

double WeightMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

WeightMatrix WeightMatrix::expand_blocks(std::size_t factor) const {
  if (factor == 0) throw DomainError("block factor must be positive");
  const std::size_t n = size();
  const std::size_t fine = n * factor;
  std::vector<double> entries(fine * fine);
  for (std::size_t p = 0; p < fine; ++p)
    for (std::size_t q = 0; q < fine; ++q)
      entries[p * fine + q] = (*this)(p / factor, q / factor);
  return WeightMatrix(uniform_nodes(fine), std::move(entries));
}

Graphon::Graphon(GraphonFamily family, double parameter)
    : family_(family), parameter_(parameter) {}

Graphon Graphon::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant graphon must be finite");
  return Graphon(GraphonFamily::constant, c);
}
Graphon Graphon::product() { return Graphon(GraphonFamily::product, 0.0); }
Graphon Graphon::min() { return Graphon(GraphonFamily::min, 0.0); }
Graphon Graphon::cosine() { return Graphon(GraphonFamily::cosine, 0.0); }
Graphon Graphon::threshold(double r) {
  if (!(r >= 0.0)) throw DomainError("threshold radius must be nonnegative");
  return Graphon(GraphonFamily::threshold, r);
}

double Graphon::operator()(double x, double y) const {
  switch (family_) {
    case GraphonFamily::constant:
      return parameter_;
    case GraphonFamily::product:
      return x * y;
    case GraphonFamily::min:
      return std::min(x, y);
    case GraphonFamily::cosine:
      return std::cos(std::numbers::pi * (x - y));
    case GraphonFamily::threshold:
      return std::abs(x - y) <= parameter_ ? 1.0 : 0.0;
    case GraphonFamily::step: {
      const std::size_t n = step_->size();
      const auto cell = [n](double v) {
        auto k = static_cast<std::size_t>(std::floor(v * static_cast<double>(n)));
        return std::min(k, n - 1);
      };
      return (*step_)(cell(x), cell(y));
    }
  }
  return 0.0;
}

std::optional<double> Graphon::lipschitz() const noexcept {
  switch (family_) {
    case GraphonFamily::constant:
      return 0.0;
    case GraphonFamily::product:
      return std::numbers::sqrt2;
    case GraphonFamily::min:
      return 1.0;
    case GraphonFamily::cosine:
      return std::numbers::pi * std::numbers::sqrt2;
    case GraphonFamily::threshold:
    case GraphonFamily::step:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string Graphon::describe() const {
  switch (family_) {
    case GraphonFamily::constant:
      return fmt::format("constant({})", parameter_);
    case GraphonFamily::product:
      return "product";
    case GraphonFamily::min:
      return "min";
    case GraphonFamily::cosine:
      return "cosine";
    case GraphonFamily::threshold:
      return fmt::format("threshold({})", parameter_);
    case GraphonFamily::step:
      return fmt::format("step({})", step_->size());
  }
  return "unknown";
}

std::vector<double> uniform_nodes(std::size_t n) {
  if (n == 0) throw DomainError("uniform_nodes needs N >= 1");
  std::vector<double> nodes(n);
  for (std::size_t k = 0; k < n; ++k)
    nodes[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  return nodes;
}

WeightMatrix sample_pointwise(const Graphon& g, std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> entries(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) entries[k * n + l] = g(nodes[k], nodes[l]);
  return WeightMatrix({nodes.begin(), nodes.end()}, std::move(entries));
}

namespace {

// Overlap of [k/n, (k+1)/n) with [a/m, (a+1)/m) in units of 1/(n*m).
std::size_t overlap_units(std::size_t k, std::size_t n, std::size_t a,
                          std::size_t m) {
  const std::size_t lo = std::max(k * m, a * n);
  const std::size_t hi = std::min((k + 1) * m, (a + 1) * n);
  return hi > lo ? hi - lo : 0;
}

}  // namespace

WeightMatrix sample_averaged(const Graphon& g, std::size_t n) {
  if (n == 0) throw DomainError("sample_averaged needs N >= 1");
  std::vector<double> entries(n * n);
  if (g.family() == GraphonFamily::step) {
    const WeightMatrix& src = *g.step_matrix();
    const std::size_t m = src.size();
    const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        double sum = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
          const std::size_t ov_a = overlap_units(k, n, a, m);
          if (ov_a == 0) continue;
          for (std::size_t b = 0; b < m; ++b) {
            const std::size_t ov_b = overlap_units(l, n, b, m);
            if (ov_b == 0) continue;
            sum += static_cast<double>(ov_a * ov_b) * src(a, b);
          }
        }
        entries[k * n + l] = sum * scale;
      }
    }
  } else {
    const QuadratureRule& rule = gauss_legendre_unit(8);
    const double width = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l <= k; ++l) {
        double sum = 0.0;
        for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
          const double x = (static_cast<double>(k) + rule.nodes[p]) * width;
          for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double y = (static_cast<double>(l) + rule.nodes[q]) * width;
            sum += rule.weights[p] * rule.weights[q] * g(x, y);
          }
        }
        entries[k * n + l] = sum;
        entries[l * n + k] = sum;
      }
    }
  }
  return WeightMatrix(uniform_nodes(n), std::move(entries));
}

Graphon step_graphon(const WeightMatrix& m) {
  Graphon g(GraphonFamily::step, 0.0);
  g.step_ = m;
  return g;
}

double lp_distance(const Graphon& g1, const Graphon& g2, int p,
                   std::size_t resolution) {
  if (p != 1 && p != 2) throw DomainError("lp_distance supports p in {1, 2}");
  if (resolution == 0) throw DomainError("lp_distance needs resolution >= 1");
  const double r = static_cast<double>(resolution);
  double sum = 0.0;
  for (std::size_t i = 0; i < resolution; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / r;
    for (std::size_t j = 0; j < resolution; ++j) {
      const double y = (static_cast<double>(j) + 0.5) / r;
      const double diff = std::abs(g1(x, y) - g2(x, y));
      sum += p == 1 ? diff : diff * diff;
    }
  }
  sum /= r * r;
  return p == 1 ? sum : std::sqrt(sum);
}

double continuity_defect(const Graphon& g, double delta, std::size_t probes) {
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("continuity_defect needs 0 < delta < 1");
  if (probes == 0) throw DomainError("continuity_defect needs probes >= 1");
  const double p = static_cast<double>(probes);
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * (1.0 - delta) / p;
    double sum = 0.0;
    for (std::size_t j = 0; j < probes; ++j) {
      const double y = (static_cast<double>(j) + 0.5) / p;
      sum += std::abs(g(x + delta, y) - g(x, y));
    }
    worst = std::max(worst, sum / p);
  }
  return worst;
}

void write_weight_matrix_csv(std::ostream& os, const WeightMatrix& m) {
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k)
    fmt::print(os, "{}{:.17g}", k ? "," : "", m.nodes()[k]);
  os << '\n';
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l)
      fmt::print(os, "{}{:.17g}", l ? "," : "", m(k, l));
    os << '\n';
  }
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, std::size_t row) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
        ++used;
      if (used != cell.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError(
          fmt::format("weight CSV line {}: '{}' is not a number", row + 1, cell));
    }
  }
  return out;
}

}  // namespace

WeightMatrix read_weight_matrix_csv(std::istream& is) {
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line, rows.size()));
  }
  if (rows.empty()) throw ValidationError("weight CSV is empty");
  const std::size_t n = rows.front().size();
  if (rows.size() != n + 1)
    throw ValidationError(fmt::format(
        "weight CSV with {} nodes needs {} matrix rows, found {}", n, n,
        rows.size() - 1));
  std::vector<double> entries;
  entries.reserve(n * n);
  for (std::size_t k = 1; k <= n; ++k) {
    if (rows[k].size() != n)
      throw ValidationError(
          fmt::format("weight CSV line {} has {} entries, expected {}", k + 1,
                      rows[k].size(), n));
    entries.insert(entries.end(), rows[k].begin(), rows[k].end());
  }
  return WeightMatrix(std::move(rows.front()), std::move(entries));
}

}  // namespace coevolve
