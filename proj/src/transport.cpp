#include "coevolve/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "coevolve/error.hpp"
#include "coevolve/parallel.hpp"

namespace coevolve {

double ProductMetric::combine(double state_distance, double label_distance) const noexcept {
  return mode == Mode::state_only ? state_distance
                                  : std::hypot(state_distance, label_distance);
}

double ProductMetric::operator()(std::span<const double> a, double xa,
                                 std::span<const double> b, double xb) const noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return combine(std::sqrt(s), std::abs(xa - xb));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_capacity(std::size_t rows, std::size_t cols) {
  if (rows > kMaxTransportAtoms || cols > kMaxTransportAtoms)
    throw CapacityError(fmt::format(
        "exact transport supports at most {} atoms per side, got {} x {}; use "
        "wasserstein1_sorted_1d for 1-d samples or subsample",
        kMaxTransportAtoms, rows, cols));
}

// Returns rescaled masses, flagging any rescale.
std::vector<double> normalized(std::span<const double> masses, bool& rescaled) {
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw ValidationError(fmt::format("transport mass {} invalid", m));
    total += m;
  }
  const double defect = std::abs(total - 1.0);
  if (defect > kMassTolerance)
    throw ValidationError(fmt::format("transport masses sum to {}, not 1", total));
  std::vector<double> out(masses.begin(), masses.end());
  if (defect > 1e-14) {
    for (double& m : out) m /= total;
    rescaled = true;
  }
  return out;
}

bool is_uniform(const std::vector<double>& masses) {
  const double target = 1.0 / static_cast<double>(masses.size());
  for (double m : masses)
    if (std::abs(m - target) > 1e-14 * target) return false;
  return true;
}

// Dense assignment: returns sigma (row -> column) of a min-cost perfect
// matching plus dual potentials with c_ij - u_i - v_j >= 0.
struct Assignment {
  std::vector<std::size_t> sigma;
  std::vector<double> u;
  std::vector<double> v;
};

Assignment hungarian(std::span<const double> cost, std::size_t n) {
  // 1-based potentials; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out{std::vector<std::size_t>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 1; j <= n; ++j) out.sigma[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.u[i] = u[i + 1];
    out.v[i] = v[i + 1];
  }
  return out;
}

// Moves `sigma` to the lexicographically smallest perfect matching of the
// equality subgraph (reduced cost <= eps), which holds only optimal
// matchings. Rows < i are fixed at each stage.
void lexicographic_refine(std::span<const double> cost, std::size_t n, Assignment& a,
                          double eps) {
  const auto tight = [&](std::size_t i, std::size_t j) {
    return cost[i * n + j] - a.u[i] - a.v[j] <= eps;
  };
  std::vector<std::size_t> row_of(n);
  for (std::size_t i = 0; i < n; ++i) row_of[a.sigma[i]] = i;
  std::vector<char> col_fixed(n, 0);
  std::vector<std::size_t> parent_col(n);
  std::vector<char> seen(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < a.sigma[i]; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      // Row r = row_of[j] (> i) must move to another column along an
      // alternating path among unfixed rows > i ending at sigma[i].
      const std::size_t target = a.sigma[i];
      std::fill(seen.begin(), seen.end(), 0);
      std::vector<std::size_t> queue{row_of[j]};
      std::size_t found = n;
      for (std::size_t q = 0; q < queue.size() && found == n; ++q) {
        const std::size_t r = queue[q];
        for (std::size_t c = 0; c < n; ++c) {
          if (col_fixed[c] || seen[c] || c == j || !tight(r, c)) continue;
          seen[c] = 1;
          parent_col[c] = r;
          if (c == target) {
            found = c;
            break;
          }
          queue.push_back(row_of[c]);
        }
      }
      if (found == n) continue;
      // Shift along the path: each row on it takes the column it reached.
      std::size_t c = found;
      while (true) {
        const std::size_t r = parent_col[c];
        const std::size_t prev = a.sigma[r];
        a.sigma[r] = c;
        row_of[c] = r;
        if (prev == j) break;
        c = prev;
      }
      a.sigma[i] = j;
      row_of[j] = i;
      break;
    }
    col_fixed[a.sigma[i]] = 1;
  }
}

TransportResult solve_assignment(std::span<const double> cost, std::size_t n,
                                 bool renormalized) {
  Assignment a = hungarian(cost, n);
  double scale = 1.0;
  for (double c : cost) scale = std::max(scale, std::abs(c));
  lexicographic_refine(cost, n, a, 1e-12 * scale);
  TransportResult result{0.0, {}};
  result.plan.renormalized = renormalized;
  const double mass = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cost[i * n + a.sigma[i]];
    sum += c;
    result.plan.entries.push_back({i, a.sigma[i], mass, c * mass});
  }
  result.distance = sum / static_cast<double>(n);
  result.plan.cost = result.distance;
  return result;
}

struct Cell {
  std::size_t i;
  std::size_t j;
  double flow;
};

TransportResult solve_simplex(std::span<const double> cost, const std::vector<double>& a,
                              const std::vector<double>& b, bool renormalized) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  // North-west corner; every cell advances exactly one index, so the basis
  // has m + n - 1 cells and spans the bipartite graph as a tree.
  std::vector<Cell> basis;
  basis.reserve(m + n - 1);
  {
    std::vector<double> supply = a, demand = b;
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::min(supply[i], demand[j]);
      basis.push_back({i, j, f});
      supply[i] -= f;
      demand[j] -= f;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == n - 1) {
        ++i;
      } else if (supply[i] <= demand[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double scale = 1.0;
  for (double c : cost) scale = std::max(scale, std::abs(c));
  const double eps = 1e-12 * scale;
  const std::size_t nodes = m + n;  // rows 0..m-1, columns m..m+n-1
  std::vector<double> potential(nodes);
  std::vector<std::vector<std::size_t>> adjacency(nodes);  // basis cell indices
  std::vector<std::size_t> parent_cell(nodes), order;
  std::vector<char> visited(nodes);
  std::vector<char> in_basis(m * n, 0);
  for (const auto& c : basis) in_basis[c.i * n + c.j] = 1;

  std::size_t degenerate_run = 0;
  const std::size_t max_pivots = 50 * (m + n) * (m + n) + 1000;
  for (std::size_t pivot = 0;; ++pivot) {
    if (pivot > max_pivots)
      throw ConvergenceError("transportation simplex exceeded its pivot budget", {});
    for (auto& adj : adjacency) adj.clear();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      adjacency[basis[k].i].push_back(k);
      adjacency[m + basis[k].j].push_back(k);
    }
    // Potentials u_i (rows) and v_j (columns) with u_i + v_j = c_ij on the
    // tree, rooted at row 0; parent_cell links each node toward the root.
    std::fill(visited.begin(), visited.end(), 0);
    order.assign(1, 0);
    visited[0] = 1;
    potential[0] = 0.0;
    parent_cell[0] = basis.size();
    for (std::size_t q = 0; q < order.size(); ++q) {
      const std::size_t node = order[q];
      for (std::size_t k : adjacency[node]) {
        const Cell& c = basis[k];
        const std::size_t other = node < m ? m + c.j : c.i;
        if (visited[other]) continue;
        visited[other] = 1;
        potential[other] = cost[c.i * n + c.j] - potential[node];
        parent_cell[other] = k;
        order.push_back(other);
      }
    }

    // Entering cell: Dantzig (most negative reduced cost) unless stalled,
    // then Bland (first negative); ties go to the lowest (i, j).
    const bool bland = degenerate_run > m + n;
    std::size_t enter_i = m, enter_j = n;
    double best = -eps;
    for (std::size_t i = 0; i < m && !(bland && enter_i < m); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (in_basis[i * n + j]) continue;
        const double r = cost[i * n + j] - potential[i] - potential[m + j];
        if (r < best) {
          best = r;
          enter_i = i;
          enter_j = j;
          if (bland) break;
        }
      }
    if (enter_i == m) break;

    // Tree path from column node to row node; cells alternate minus/plus
    // starting with minus next to the entering cell's column.
    std::vector<std::size_t> path_a, path_b;  // cells toward the root
    std::vector<std::size_t> depth_mark(nodes, 0);
    {
      std::vector<std::size_t> anc_row;
      for (std::size_t v = enter_i; v != 0; ) {
        const std::size_t k = parent_cell[v];
        anc_row.push_back(k);
        const Cell& c = basis[k];
        v = v < m ? m + c.j : c.i;
      }
      // Mark the row's ancestors with their position + 1.
      std::vector<std::size_t> row_nodes{enter_i};
      for (std::size_t k : anc_row) {
        const Cell& c = basis[k];
        const std::size_t last = row_nodes.back();
        row_nodes.push_back(last < m ? m + c.j : c.i);
      }
      for (std::size_t p = 0; p < row_nodes.size(); ++p) depth_mark[row_nodes[p]] = p + 1;
      std::size_t v = m + enter_j;
      while (depth_mark[v] == 0) {
        const std::size_t k = parent_cell[v];
        path_a.push_back(k);
        const Cell& c = basis[k];
        v = v < m ? m + c.j : c.i;
      }
      const std::size_t meet = depth_mark[v] - 1;
      for (std::size_t p = meet; p-- > 0;) path_b.push_back(anc_row[p]);
    }
    std::vector<std::size_t> cycle = path_a;
    cycle.insert(cycle.end(), path_b.begin(), path_b.end());

    double theta = kInf;
    std::size_t leave = basis.size();
    for (std::size_t p = 0; p < cycle.size(); p += 2) {
      const Cell& c = basis[cycle[p]];
      const bool better =
          c.flow < theta ||
          (c.flow == theta && leave < basis.size() &&
           std::pair(c.i, c.j) < std::pair(basis[leave].i, basis[leave].j));
      if (better) {
        theta = c.flow;
        leave = cycle[p];
      }
    }
    degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    for (std::size_t p = 0; p < cycle.size(); ++p)
      basis[cycle[p]].flow += (p % 2 == 0) ? -theta : theta;
    in_basis[basis[leave].i * n + basis[leave].j] = 0;
    basis[leave] = {enter_i, enter_j, theta};
    in_basis[enter_i * n + enter_j] = 1;
  }

  std::sort(basis.begin(), basis.end(), [](const Cell& x, const Cell& y) {
    return std::pair(x.i, x.j) < std::pair(y.i, y.j);
  });
  TransportResult result{0.0, {}};
  result.plan.renormalized = renormalized;
  double sum = 0.0;
  for (const auto& c : basis) {
    if (c.flow <= 0.0) continue;
    const double contribution = c.flow * cost[c.i * n + c.j];
    sum += contribution;
    result.plan.entries.push_back({c.i, c.j, c.flow, contribution});
  }
  result.distance = sum;
  result.plan.cost = sum;
  return result;
}

std::vector<double> cost_matrix(std::size_t rows, std::size_t cols,
                                const auto& distance) {
  std::vector<double> cost(rows * cols);
  parallel_for(rows, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) cost[i * cols + j] = distance(i, j);
  });
  return cost;
}

}  // namespace

TransportResult solve_transport(std::span<const double> cost, std::span<const double> a,
                                std::span<const double> b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0 || n == 0) throw DomainError("transport between empty measures");
  check_capacity(m, n);
  if (cost.size() != m * n)
    throw ShapeError(fmt::format("cost matrix has {} entries, expected {}", cost.size(), m * n));
  bool renormalized = false;
  const std::vector<double> ma = normalized(a, renormalized);
  const std::vector<double> mb = normalized(b, renormalized);
  if (m == n && is_uniform(ma) && is_uniform(mb))
    return solve_assignment(cost, m, renormalized);
  return solve_simplex(cost, ma, mb, renormalized);
}

TransportResult wasserstein1_exact(const LabeledPointMeasure& a,
                                   const LabeledPointMeasure& b, ProductMetric metric) {
  if (a.dim() != b.dim()) throw ShapeError("measures differ in dimension");
  check_capacity(a.size(), b.size());
  const auto cost = cost_matrix(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
    return metric(a.atom(i), a.labels()[i], b.atom(j), b.labels()[j]);
  });
  return solve_transport(cost, a.masses(), b.masses());
}

double wasserstein1_sorted_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ValidationError(
        fmt::format("sorted 1-d W1 needs equal counts, got {} and {}", a.size(), b.size()));
  if (a.empty()) throw DomainError("sorted 1-d W1 of empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
  return sum / static_cast<double>(x.size());
}

TransportResult path_wasserstein1(const LabeledPathMeasure& a, const LabeledPathMeasure& b,
                                  ProductMetric metric) {
  if (!(a.grid() == b.grid()) || a.dim() != b.dim())
    throw ShapeError("path measures must share grid and dimension");
  check_capacity(a.size(), b.size());
  const auto cost = cost_matrix(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
    return metric.combine(sup_distance(a.path(i), b.path(j)),
                          std::abs(a.labels()[i] - b.labels()[j]));
  });
  return solve_transport(cost, a.masses(), b.masses());
}

namespace {

void require_same_partition(const FiberedMeasure& a, const FiberedMeasure& b) {
  if (a.blocks() != b.blocks())
    throw ValidationError(fmt::format("fibered measures have {} and {} blocks", a.blocks(),
                                      b.blocks()));
}

}  // namespace

double dist_fibered(const FiberedMeasure& a, const FiberedMeasure& b) {
  require_same_partition(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.blocks(); ++i)
    sum += path_wasserstein1(a.fiber(i), b.fiber(i), ProductMetric::state_only()).distance;
  return sum / static_cast<double>(a.blocks());
}

double dist_fibered(const FiberedMeasure& a, const FiberedMeasure& b, double t) {
  require_same_partition(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.blocks(); ++i)
    sum += wasserstein1_exact(a.fiber(i).at_time(t), b.fiber(i).at_time(t),
                              ProductMetric::state_only())
               .distance;
  return sum / static_cast<double>(a.blocks());
}

void write_transport_plan_csv(std::ostream& os, const TransportPlan& plan) {
  os << "i,j,mass,cost_contribution\n";
  for (const auto& e : plan.entries)
    fmt::print(os, "{},{},{:.17g},{:.17g}\n", e.i, e.j, e.mass, e.cost_contribution);
}

}  // namespace coevolve
