#include "coevolve/particle_dynamics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "coevolve/error.hpp"
#include "coevolve/parallel.hpp"

namespace coevolve {

namespace {

void require_grid(const Trajectory& traj, const TimeGrid& grid,
                  const char* what) {
  if (!(traj.grid() == grid))
    throw ShapeError(fmt::format("{} is not sampled on the integration grid", what));
}

void require_finite_weight(double w, std::size_t step) {
  if (!std::isfinite(w))
    throw DivergenceError(
        fmt::format("weight ODE state became {} at step {}", w, step), step);
}

}  // namespace

Trajectory solve_weight_ode(const WeightDynamics& dynamics, double w0,
                            const Trajectory& gamma, const Trajectory& gamma2,
                            const TimeGrid& grid) {
  require_grid(gamma, grid, "gamma");
  require_grid(gamma2, grid, "gamma2");
  std::vector<double> w(grid.nodes());
  w[0] = w0;
  const double h = grid.step_size();
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    w[i + 1] = heun_weight_step(dynamics, w[i], h, gamma.at_node(i),
                                gamma2.at_node(i), gamma.at_node(i + 1),
                                gamma2.at_node(i + 1));
    require_finite_weight(w[i + 1], i + 1);
  }
  return Trajectory(grid, 1, std::move(w));
}

double flow_map(const WeightDynamics& dynamics, double w0,
                const Trajectory& gamma, const Trajectory& gamma2, double t0,
                double t) {
  const TimeGrid& grid = gamma.grid();
  require_grid(gamma2, grid, "gamma2");
  if (t0 > t) throw DomainError(fmt::format("flow_map needs t0 <= t, got {} > {}", t0, t));
  const std::size_t first = grid.node_index(t0);
  const std::size_t last = grid.node_index(t);
  const double h = grid.step_size();
  double w = w0;
  for (std::size_t i = first; i < last; ++i) {
    w = heun_weight_step(dynamics, w, h, gamma.at_node(i), gamma2.at_node(i),
                         gamma.at_node(i + 1), gamma2.at_node(i + 1));
    require_finite_weight(w, i + 1);
  }
  return w;
}

Trajectory duhamel_weight(double decay, const PairFunction& forcing, double w0,
                          const Trajectory& gamma, const Trajectory& gamma2,
                          const TimeGrid& grid) {
  if (!(decay > 0.0))
    throw DomainError(fmt::format("Duhamel weight needs a > 0, got {}", decay));
  require_grid(gamma, grid, "gamma");
  require_grid(gamma2, grid, "gamma2");
  const std::size_t nodes = grid.nodes();
  const double h = grid.step_size();
  std::vector<double> g(nodes);
  for (std::size_t j = 0; j < nodes; ++j) g[j] = forcing(gamma.at_node(j), gamma2.at_node(j));
  std::vector<double> w(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double ti = grid.node(i);
    double integral = 0.0;
    if (i > 0) {
      integral = 0.5 * (g[0] * std::exp(-decay * ti) + g[i]);
      for (std::size_t j = 1; j < i; ++j)
        integral += g[j] * std::exp(-decay * (ti - grid.node(j)));
      integral *= h;
    }
    w[i] = w0 * std::exp(-decay * ti) + integral;
  }
  return Trajectory(grid, 1, std::move(w));
}

std::vector<double> flatten_states(const StateList& states,
                                   std::size_t expected_count) {
  if (states.size() != expected_count)
    throw ShapeError(fmt::format("expected {} initial states, got {}",
                                 expected_count, states.size()));
  if (states.empty()) throw ShapeError("no initial states");
  const std::size_t dim = states.front().size();
  if (dim == 0) throw ShapeError("initial states must have dimension >= 1");
  std::vector<double> flat;
  flat.reserve(expected_count * dim);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].size() != dim)
      throw ShapeError(fmt::format("initial state {} has dimension {}, expected {}",
                                   k, states[k].size(), dim));
    flat.insert(flat.end(), states[k].begin(), states[k].end());
  }
  return flat;
}

CoupledSolution simulate_coupled(const PairFunction& coupling,
                                 const WeightDynamics& dynamics,
                                 const WeightMatrix& w_in,
                                 const StateList& phi_in, const TimeGrid& grid,
                                 bool store_weights) {
  const std::size_t n = w_in.size();
  std::vector<double> phi = flatten_states(phi_in, n);
  const std::size_t d = phi_in.front().size();
  const std::size_t nodes = grid.nodes();
  const double h = grid.step_size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> w(w_in.entries().begin(), w_in.entries().end());
  std::vector<double> phi_path(n * nodes * d);
  std::vector<double> w_path(store_weights ? n * n * nodes : 0);
  const auto record = [&](std::size_t node) {
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < d; ++c)
        phi_path[(k * nodes + node) * d + c] = phi[k * d + c];
    if (store_weights)
      for (std::size_t p = 0; p < n * n; ++p) w_path[p * nodes + node] = w[p];
  };
  record(0);

  std::vector<double> k1(n), k2(n), k1w(n * n), k2w(n * n);
  std::vector<double> phi_t(n * d), w_t(n * n);
  const auto rhs = [&](const std::vector<double>& ph, const std::vector<double>& ww,
                       std::vector<double>& kp, std::vector<double>& kw) {
    parallel_for(n, [&](std::size_t k) {
      const std::span<const double> self(ph.data() + k * d, d);
      double sum = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        const std::span<const double> other(ph.data() + l * d, d);
        sum += inv_n * ww[k * n + l] * coupling(self, other);
        kw[k * n + l] = dynamics(ww[k * n + l], self, other);
      }
      kp[k] = sum;
    });
  };

  for (std::size_t i = 0; i < grid.steps(); ++i) {
    rhs(phi, w, k1, k1w);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < d; ++c) phi_t[k * d + c] = phi[k * d + c] + h * k1[k];
    for (std::size_t p = 0; p < n * n; ++p) w_t[p] = w[p] + h * k1w[p];
    rhs(phi_t, w_t, k2, k2w);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < d; ++c) phi[k * d + c] += 0.5 * h * (k1[k] + k2[k]);
    for (std::size_t p = 0; p < n * n; ++p) w[p] += 0.5 * h * (k1w[p] + k2w[p]);
    for (std::size_t q = 0; q < phi.size(); ++q)
      if (!std::isfinite(phi[q]))
        throw DivergenceError(
            fmt::format("particle {} diverged at step {}: {}", q / d, i + 1,
                        describe_state(phi.data() + (q / d) * d, d)),
            i + 1);
    for (std::size_t p = 0; p < n * n; ++p)
      if (!std::isfinite(w[p]))
        throw DivergenceError(fmt::format("weight ({}, {}) diverged at step {}",
                                          p / n, p % n, i + 1),
                              i + 1);
    record(i + 1);
  }

  std::vector<Trajectory> trajectories;
  trajectories.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto begin = phi_path.begin() + static_cast<std::ptrdiff_t>(k * nodes * d);
    trajectories.emplace_back(grid, d, std::vector<double>(begin, begin + nodes * d));
  }
  CoupledSolution solution{Ensemble(std::move(trajectories), w_in.nodes()), std::nullopt};
  if (store_weights) {
    std::vector<Trajectory> weights;
    weights.reserve(n * n);
    for (std::size_t p = 0; p < n * n; ++p) {
      const auto begin = w_path.begin() + static_cast<std::ptrdiff_t>(p * nodes);
      weights.emplace_back(grid, 1, std::vector<double>(begin, begin + nodes));
    }
    solution.weights = std::move(weights);
  }
  return solution;
}

NonlocalHistory integrate_nonlocal(const NonlocalProblem& problem,
                                   const TimeGrid& grid,
                                   const NonlocalHistory* frozen) {
  const std::size_t m = problem.atoms;
  const std::size_t d = problem.dim;
  if (problem.kernel == nullptr) throw DomainError("non-local problem without kernel");
  if (m == 0) throw DomainError("non-local problem without atoms");
  if (d == 0) throw ShapeError("state dimension must be >= 1");
  if (problem.weights.size() != m * m || problem.masses.size() != m ||
      problem.initial.size() != m * d)
    throw ShapeError(fmt::format(
        "non-local problem with {} atoms of dimension {} got {} weights, {} "
        "masses, {} initial values",
        m, d, problem.weights.size(), problem.masses.size(), problem.initial.size()));
  const std::size_t nodes = grid.nodes();
  if (frozen != nullptr &&
      (frozen->atoms != m || frozen->dim != d || frozen->nodes != nodes))
    throw ShapeError("frozen history does not match the problem shape");

  NonlocalHistory out;
  out.atoms = m;
  out.dim = d;
  out.nodes = nodes;
  out.accepted.assign(m * nodes * d, 0.0);
  out.predicted.assign(m * nodes * d, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t c = 0; c < d; ++c) {
      out.accepted[j * nodes * d + c] = problem.initial[j * d + c];
      out.predicted[j * nodes * d + c] = problem.initial[j * d + c];
    }

  const MemoryKernel& kernel = *problem.kernel;
  KernelWorkspace workspace(kernel, grid, m, m, problem.weights, problem.paranoid);
  const double h = grid.step_size();
  std::vector<double> f1(m);
  double* acc = out.accepted.data();
  double* pred = out.predicted.data();
  const auto self_base = [&](std::size_t j) { return acc + j * nodes * d; };
  const auto other_accepted = [&](std::size_t l) -> const double* {
    return frozen ? frozen->atom(l) : acc + l * nodes * d;
  };
  const auto other_tips = [&](std::size_t l) -> const double* {
    return frozen ? frozen->tips(l) : pred + l * nodes * d;
  };
  const auto checked = [&](double v, std::size_t step, std::size_t j, std::size_t l) {
    if (!std::isfinite(v))
      throw KernelError(fmt::format("kernel returned {} for pair ({}, {}) at step {}",
                                    v, j, l, step),
                        step, j, l);
    return v;
  };

  for (std::size_t i = 0; i < grid.steps(); ++i) {
    parallel_for(m, [&](std::size_t j) {
      const double* self = self_base(j);
      const HistoryView sv(self, d, i, self + i * d);
      double sum = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        const double* other = other_accepted(l);
        const HistoryView ov(other, d, i, other + i * d);
        sum += problem.masses[l] * checked(workspace.evaluate(j, l, sv, ov), i, j, l);
      }
      f1[j] = sum;
      double* tip = pred + (j * nodes + i + 1) * d;
      for (std::size_t c = 0; c < d; ++c) tip[c] = self[i * d + c] + h * sum;
    });
    parallel_for(m, [&](std::size_t j) {
      double* self = self_base(j);
      const HistoryView sv(self, d, i + 1, pred + (j * nodes + i + 1) * d);
      double sum = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        const HistoryView ov(other_accepted(l), d, i + 1, other_tips(l) + (i + 1) * d);
        sum += problem.masses[l] * checked(workspace.evaluate(j, l, sv, ov), i + 1, j, l);
      }
      for (std::size_t c = 0; c < d; ++c) {
        const double v = self[i * d + c] + 0.5 * h * (f1[j] + sum);
        if (!std::isfinite(v))
          throw DivergenceError(fmt::format("atom {} diverged at step {}: {}", j,
                                            i + 1, describe_state(self + i * d, d)),
                                i + 1);
        self[(i + 1) * d + c] = v;
      }
    });
    if (kernel.has_memory()) {
      parallel_for(m, [&](std::size_t j) {
        const double* self = self_base(j);
        const HistoryView sv(self, d, i + 1, self + (i + 1) * d);
        for (std::size_t l = 0; l < m; ++l) {
          const double* other = other_accepted(l);
          workspace.commit(j, l, sv, HistoryView(other, d, i + 1, other + (i + 1) * d));
        }
      });
    }
    workspace.advance();
  }
  return out;
}

Ensemble to_ensemble(const NonlocalHistory& history, const TimeGrid& grid,
                     std::vector<double> labels) {
  if (history.nodes != grid.nodes()) throw ShapeError("history does not match grid");
  std::vector<Trajectory> trajectories;
  trajectories.reserve(history.atoms);
  const std::size_t span = history.nodes * history.dim;
  for (std::size_t j = 0; j < history.atoms; ++j) {
    const auto begin = history.accepted.begin() + static_cast<std::ptrdiff_t>(j * span);
    trajectories.emplace_back(grid, history.dim, std::vector<double>(begin, begin + span));
  }
  return Ensemble(std::move(trajectories), std::move(labels));
}

Ensemble simulate_memory(const MemoryKernel& kernel, const WeightMatrix& w_in,
                         const StateList& phi_in, const TimeGrid& grid,
                         bool paranoid) {
  const std::size_t n = w_in.size();
  const std::vector<double> initial = flatten_states(phi_in, n);
  const std::vector<double> masses(n, 1.0 / static_cast<double>(n));
  NonlocalProblem problem;
  problem.kernel = &kernel;
  problem.atoms = n;
  problem.dim = phi_in.front().size();
  problem.weights = w_in.entries();
  problem.masses = masses;
  problem.initial = initial;
  problem.paranoid = paranoid;
  return to_ensemble(integrate_nonlocal(problem, grid), grid, w_in.nodes());
}

}  // namespace coevolve
