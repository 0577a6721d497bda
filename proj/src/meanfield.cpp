#include "coevolve/meanfield.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

// Keeps the spans in `problem` pointing into the owning vectors.
struct ProblemHolder {
  std::vector<double> weights;
  std::vector<double> masses;
  std::vector<double> initial;
  std::size_t atoms;
  std::size_t dim;

  NonlocalProblem view(const MemoryKernel& kernel) const {
    NonlocalProblem p;
    p.kernel = &kernel;
    p.atoms = atoms;
    p.dim = dim;
    p.weights = weights;
    p.masses = masses;
    p.initial = initial;
    return p;
  }
};

ProblemHolder atomic_problem(const Graphon& graphon, const LabeledPointMeasure& mu0) {
  const std::size_t m = mu0.size();
  ProblemHolder h{std::vector<double>(m * m), mu0.masses(),
                  std::vector<double>(mu0.atoms().begin(), mu0.atoms().end()), m,
                  mu0.dim()};
  const auto& x = mu0.labels();
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t l = 0; l < m; ++l) h.weights[j * m + l] = graphon(x[j], x[l]);
  return h;
}

LabeledPathMeasure to_measure(const NonlocalHistory& history, const TimeGrid& grid,
                              const LabeledPointMeasure& mu0) {
  Ensemble e = to_ensemble(history, grid, mu0.labels());
  return LabeledPathMeasure(e.trajectories(), mu0.labels(), mu0.masses());
}

double history_defect(const NonlocalHistory& a, const NonlocalHistory& b) {
  double worst = 0.0;
  const std::size_t d = a.dim;
  for (std::size_t p = 0; p < a.atoms * a.nodes; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = a.accepted[p * d + c] - b.accepted[p * d + c];
      s += diff * diff;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

NonlocalHistory constant_history(const LabeledPointMeasure& mu0, std::size_t nodes) {
  NonlocalHistory h;
  h.atoms = mu0.size();
  h.dim = mu0.dim();
  h.nodes = nodes;
  h.accepted.resize(h.atoms * nodes * h.dim);
  for (std::size_t j = 0; j < h.atoms; ++j)
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t c = 0; c < h.dim; ++c)
        h.accepted[(j * nodes + i) * h.dim + c] = mu0.atom(j)[c];
  h.predicted = h.accepted;
  return h;
}

// Extends the stores to `nodes` nodes, holding each atom's last values.
NonlocalHistory extend_history(const NonlocalHistory& h, std::size_t nodes) {
  NonlocalHistory out;
  out.atoms = h.atoms;
  out.dim = h.dim;
  out.nodes = nodes;
  out.accepted.resize(h.atoms * nodes * h.dim);
  out.predicted.resize(h.atoms * nodes * h.dim);
  for (std::size_t j = 0; j < h.atoms; ++j)
    for (std::size_t i = 0; i < nodes; ++i) {
      const std::size_t src = std::min(i, h.nodes - 1);
      for (std::size_t c = 0; c < h.dim; ++c) {
        out.accepted[(j * nodes + i) * h.dim + c] =
            h.accepted[(j * h.nodes + src) * h.dim + c];
        out.predicted[(j * nodes + i) * h.dim + c] =
            i < h.nodes ? h.predicted[(j * h.nodes + i) * h.dim + c]
                        : h.accepted[(j * h.nodes + src) * h.dim + c];
      }
    }
  return out;
}

NonlocalHistory picard(const NonlocalProblem& problem, const TimeGrid& grid,
                       NonlocalHistory current, double tol, std::size_t max_iter,
                       FixedPointReport& report) {
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    NonlocalHistory next = integrate_nonlocal(problem, grid, &current);
    const double defect = history_defect(next, current);
    report.defects.push_back(defect);
    report.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    ++report.iterations;
    current = std::move(next);
    if (defect <= tol) return current;
  }
  throw ConvergenceError(
      fmt::format("Picard iteration did not reach tolerance {} in {} iterations "
                  "(last defect {})",
                  tol, max_iter, report.final_defect()),
      report.defects);
}

void require_tolerance(double tol) {
  if (!(tol > 0.0)) throw DomainError("fixed-point tolerance must be > 0");
}

}  // namespace

LabeledPathMeasure solve_characteristics(const MemoryKernel& kernel,
                                         const Graphon& graphon,
                                         const LabeledPointMeasure& mu0,
                                         const TimeGrid& grid, bool paranoid) {
  const ProblemHolder holder = atomic_problem(graphon, mu0);
  NonlocalProblem problem = holder.view(kernel);
  problem.paranoid = paranoid;
  return to_measure(integrate_nonlocal(problem, grid), grid, mu0);
}

ContinuumField solve_continuum(const MemoryKernel& kernel, const Graphon& graphon,
                               const Profile& u0, std::size_t n_x,
                               const TimeGrid& grid) {
  if (n_x == 0) throw DomainError("solve_continuum needs n_x >= 1");
  StateList samples;
  samples.reserve(n_x);
  for (double x : uniform_nodes(n_x)) samples.push_back({u0(x)});
  return solve_continuum(kernel, graphon, samples, grid);
}

ContinuumField solve_continuum(const MemoryKernel& kernel, const Graphon& graphon,
                               const StateList& u0_samples, const TimeGrid& grid) {
  if (u0_samples.empty()) throw DomainError("solve_continuum needs n_x >= 1");
  const std::vector<double> xgrid = uniform_nodes(u0_samples.size());
  Ensemble e = simulate_memory(kernel, sample_pointwise(graphon, xgrid), u0_samples, grid);
  return ContinuumField(xgrid, e.trajectories());
}

ContinuumMeasures continuum_to_measure(const ContinuumField& field) {
  const std::size_t n = field.size();
  std::vector<LabeledPathMeasure> fibers;
  fibers.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    fibers.emplace_back(std::vector<Trajectory>{field.at(j)},
                        std::vector<double>{field.xgrid()[j]}, std::vector<double>{1.0});
  return {FiberedMeasure(std::move(fibers)),
          LabeledPathMeasure(field.values(), field.xgrid(),
                             std::vector<double>(n, 1.0 / static_cast<double>(n)))};
}

FixedPointResult fixed_point_iterate(const MemoryKernel& kernel, const Graphon& graphon,
                                     const LabeledPointMeasure& mu0,
                                     const TimeGrid& grid, double tol,
                                     std::size_t max_iter) {
  require_tolerance(tol);
  const ProblemHolder holder = atomic_problem(graphon, mu0);
  FixedPointReport report;
  NonlocalHistory result = picard(holder.view(kernel), grid,
                                  constant_history(mu0, grid.nodes()), tol, max_iter, report);
  return {to_measure(result, grid, mu0), std::move(report)};
}

FixedPointResult fixed_point_iterate_windowed(const MemoryKernel& kernel,
                                              const Graphon& graphon,
                                              const LabeledPointMeasure& mu0,
                                              const TimeGrid& grid, double tol,
                                              std::size_t max_iter, double window) {
  require_tolerance(tol);
  if (!(window > 0.0)) throw DomainError("window length must be > 0");
  const ProblemHolder holder = atomic_problem(graphon, mu0);
  const NonlocalProblem problem = holder.view(kernel);
  const auto per_window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(window / grid.step_size())));
  FixedPointReport report;
  NonlocalHistory current = constant_history(mu0, 1);
  std::size_t end = 0;
  while (end < grid.steps()) {
    end = std::min(grid.steps(), end + per_window);
    const TimeGrid sub = grid.prefix(end);
    current = picard(problem, sub, extend_history(current, sub.nodes()), tol, max_iter,
                     report);
    report.windows.push_back(grid.node(end));
  }
  return {to_measure(current, grid, mu0), std::move(report)};
}

double TestFunction::value(std::span<const double> zeta, double x) const {
  switch (kind) {
    case Kind::one:
      return 1.0;
    case Kind::coordinate:
      return zeta[index];
    case Kind::square:
      return zeta[index] * zeta[index];
    case Kind::bump_coordinate: {
      const double s = std::sin(std::numbers::pi * x);
      return s * s * zeta[index];
    }
  }
  return 0.0;
}

double TestFunction::gradient(std::span<const double> zeta, double x,
                              std::size_t c) const {
  if (kind == Kind::one || c != index) return 0.0;
  switch (kind) {
    case Kind::coordinate:
      return 1.0;
    case Kind::square:
      return 2.0 * zeta[index];
    case Kind::bump_coordinate: {
      const double s = std::sin(std::numbers::pi * x);
      return s * s;
    }
    case Kind::one:
      break;
  }
  return 0.0;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::one:
      return "1";
    case Kind::coordinate:
      return fmt::format("zeta{}", index);
    case Kind::square:
      return fmt::format("zeta{}^2", index);
    case Kind::bump_coordinate:
      return fmt::format("bump(x)*zeta{}", index);
  }
  return "unknown";
}

WeakResidual weak_form_residual(const LabeledPathMeasure& mu, const MemoryKernel& kernel,
                                const Graphon& graphon, const TestFunction& test,
                                double t) {
  const TimeGrid& grid = mu.grid();
  if (grid.nodes() < 3) throw DomainError("weak_form_residual needs at least 3 nodes");
  const std::size_t d = mu.dim();
  if (test.kind != TestFunction::Kind::one && test.index >= d)
    throw DomainError(fmt::format("test coordinate {} out of range for dimension {}",
                                  test.index, d));
  const std::size_t i = grid.node_index(t);
  const std::size_t m = mu.size();
  const auto& x = mu.labels();
  const auto& mass = mu.masses();

  const auto integral = [&](std::size_t node) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += mass[j] * test.value(mu.path(j).at_node(node), x[j]);
    return s;
  };
  const double h = grid.step_size();
  const std::size_t last = grid.steps();
  double derivative;
  bool one_sided = false;
  if (i == 0) {
    derivative = (-3.0 * integral(0) + 4.0 * integral(1) - integral(2)) / (2.0 * h);
    one_sided = true;
  } else if (i == last) {
    derivative =
        (3.0 * integral(last) - 4.0 * integral(last - 1) + integral(last - 2)) / (2.0 * h);
    one_sided = true;
  } else {
    derivative = (integral(i + 1) - integral(i - 1)) / (2.0 * h);
  }

  std::vector<double> weights(m * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t l = 0; l < m; ++l) weights[j * m + l] = graphon(x[j], x[l]);
  KernelWorkspace workspace(kernel, grid, m, m, weights);
  const auto view = [&](std::size_t j, std::size_t horizon) {
    const double* base = mu.path(j).values().data();
    return HistoryView(base, d, horizon, base + horizon * d);
  };
  if (kernel.has_memory())
    for (std::size_t c = 0; c < i; ++c) {
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t l = 0; l < m; ++l) workspace.commit(j, l, view(j, c + 1), view(l, c + 1));
      workspace.advance();
    }
  else
    for (std::size_t c = 0; c < i; ++c) workspace.advance();

  double rhs = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const HistoryView sv = view(j, i);
    double drift = 0.0;
    for (std::size_t l = 0; l < m; ++l) drift += mass[l] * workspace.evaluate(j, l, sv, view(l, i));
    double grad = 0.0;
    for (std::size_t c = 0; c < d; ++c) grad += test.gradient(sv.current(), x[j], c);
    rhs += mass[j] * grad * drift;
  }
  return {std::abs(derivative - rhs), one_sided};
}

StateList sample_block_states(const InitialLaw& law, std::size_t n, std::size_t m,
                              std::uint64_t seed) {
  if (m == 0) throw DomainError("block system needs m >= 1");
  const std::vector<BlockLaw> blocks = block_initial_measures(law, n);
  StateList states;
  states.reserve(n * m);
  for (std::size_t k = 0; k < n; ++k) {
    CounterRng rng(seed, k);
    for (std::size_t a = 0; a < m; ++a) states.push_back({blocks[k].sample(rng)});
  }
  return states;
}

Ensemble sample_block_system(const InitialLaw& law, std::size_t n, std::size_t m,
                             std::uint64_t seed, const Graphon& graphon,
                             const MemoryKernel& kernel, const TimeGrid& grid) {
  const StateList states = sample_block_states(law, n, m, seed);
  const WeightMatrix weights = sample_averaged(graphon, n).expand_blocks(m);
  return simulate_memory(kernel, weights, states, grid);
}

FiberedMeasure local_empirical_measure(const Ensemble& ensemble, std::size_t n,
                                       std::size_t m) {
  if (n == 0 || m == 0 || ensemble.size() != n * m)
    throw ShapeError(fmt::format("ensemble of {} trajectories is not {} blocks of {}",
                                 ensemble.size(), n, m));
  std::vector<LabeledPathMeasure> fibers;
  fibers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto first = ensemble.trajectories().begin() + static_cast<std::ptrdiff_t>(i * m);
    const auto label = ensemble.labels().begin() + static_cast<std::ptrdiff_t>(i * m);
    fibers.emplace_back(std::vector<Trajectory>(first, first + static_cast<std::ptrdiff_t>(m)),
                        std::vector<double>(label, label + static_cast<std::ptrdiff_t>(m)),
                        std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }
  return FiberedMeasure(std::move(fibers));
}

double lipschitz_flow_bound(double l_k, double l_w, double dzeta, double dx, double t) {
  const double growth = std::exp(l_k * t);
  return growth * dzeta + l_w * (growth - 1.0) * dx;
}

}  // namespace coevolve
