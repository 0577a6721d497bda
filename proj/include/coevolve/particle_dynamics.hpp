#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "coevolve/catalog.hpp"
#include "coevolve/graphon.hpp"
#include "coevolve/kernel.hpp"
#include "coevolve/trajectory.hpp"

namespace coevolve {

/// Initial states, one d-vector per particle.
using StateList = std::vector<std::vector<double>>;

/// Heun integration of w' = F(w, gamma_t, gamma2_t), w(0) = w0.
Trajectory solve_weight_ode(const WeightDynamics& dynamics, double w0,
                            const Trajectory& gamma, const Trajectory& gamma2,
                            const TimeGrid& grid);

/// Phi_{t0,t}[w0]: the same Heun steps as solve_weight_ode, run from node
/// t0 to node t.
double flow_map(const WeightDynamics& dynamics, double w0,
                const Trajectory& gamma, const Trajectory& gamma2, double t0,
                double t);

/// w(t_i) = w0 e^{-a t_i} + int_0^{t_i} g(gamma_s, gamma2_s) e^{-a (t_i - s)} ds
/// with the trapezoid rule on the grid, evaluated independently per node.
Trajectory duhamel_weight(double decay, const PairFunction& forcing, double w0,
                          const Trajectory& gamma, const Trajectory& gamma2,
                          const TimeGrid& grid);

struct CoupledSolution {
  Ensemble particles;
  /// Row-major N x N scalar weight paths, present when requested.
  std::optional<std::vector<Trajectory>> weights;
};

/// Heun integration of the joint particle/weight system
/// phi_k' = (1/N) sum_l w_kl C(phi_k, phi_l), w_kl' = F(w_kl, phi_k, phi_l).
CoupledSolution simulate_coupled(const PairFunction& coupling,
                                 const WeightDynamics& dynamics,
                                 const WeightMatrix& w_in,
                                 const StateList& phi_in, const TimeGrid& grid,
                                 bool store_weights = false);

/// Atom-major history stores of a non-local run; value (j, i, c) lives at
/// [(j * nodes + i) * dim + c].
struct NonlocalHistory {
  std::size_t atoms = 0;
  std::size_t dim = 0;
  std::size_t nodes = 0;
  std::vector<double> accepted;
  /// Predictor tips; node 0 holds the initial state.
  std::vector<double> predicted;

  const double* atom(std::size_t j) const { return accepted.data() + j * nodes * dim; }
  const double* tips(std::size_t j) const { return predicted.data() + j * nodes * dim; }
};

/// The closed system z_j' = sum_l m_l K_t(a_jl, r_t z_j, r_t z_l).
struct NonlocalProblem {
  const MemoryKernel* kernel = nullptr;
  std::size_t atoms = 0;
  std::size_t dim = 0;
  std::span<const double> weights;  // atoms x atoms, row-major
  std::span<const double> masses;   // atoms
  std::span<const double> initial;  // atoms x dim
  bool paranoid = false;
};

/// Heun-with-history integrator shared by the particle, characteristic and
/// continuum solvers. Step i: the predictor evaluates K at horizon i on
/// accepted histories, the corrector at horizon i + 1 with every atom's
/// predicted tip appended, and accepted pair states are committed last.
///
/// With `frozen`, the other atom's history in every pair (including l = j)
/// is read from the frozen stores, accepted and predicted, instead of the
/// running solution; this is the frozen-measure map of a Picard step.
NonlocalHistory integrate_nonlocal(const NonlocalProblem& problem,
                                   const TimeGrid& grid,
                                   const NonlocalHistory* frozen = nullptr);

Ensemble to_ensemble(const NonlocalHistory& history, const TimeGrid& grid,
                     std::vector<double> labels);

/// phi_k' = (1/N) sum_l K_t(w_kl, r_t phi_k, r_t phi_l).
Ensemble simulate_memory(const MemoryKernel& kernel, const WeightMatrix& w_in,
                         const StateList& phi_in, const TimeGrid& grid,
                         bool paranoid = false);

/// Flattens a state list after checking count and common dimension.
std::vector<double> flatten_states(const StateList& states,
                                   std::size_t expected_count);

}  // namespace coevolve
