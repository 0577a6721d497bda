#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "coevolve/graphon.hpp"
#include "coevolve/initial_data.hpp"
#include "coevolve/kernel.hpp"
#include "coevolve/measures.hpp"
#include "coevolve/particle_dynamics.hpp"

namespace coevolve {

/// Characteristics Z^{x_j}, j = 1..M, of the atomic initial measure mu0:
/// z_j' = sum_l m_l K_t(W(x_j, x_l), r_t z_j, r_t z_l); returns (Z, id)# mu0.
LabeledPathMeasure solve_characteristics(const MemoryKernel& kernel,
                                         const Graphon& graphon,
                                         const LabeledPointMeasure& mu0,
                                         const TimeGrid& grid,
                                         bool paranoid = false);

/// Collocation of the continuum equation at the n_x cell centers with the
/// midpoint rule in y.
ContinuumField solve_continuum(const MemoryKernel& kernel, const Graphon& graphon,
                               const Profile& u0, std::size_t n_x,
                               const TimeGrid& grid);

/// Same with u0 given by its samples on the n_x cell centers.
ContinuumField solve_continuum(const MemoryKernel& kernel, const Graphon& graphon,
                               const StateList& u0_samples, const TimeGrid& grid);

struct ContinuumMeasures {
  FiberedMeasure fibered;     // one Dirac fiber per cell
  LabeledPathMeasure flat;    // n_x atoms of mass 1/n_x at the cell centers
};

ContinuumMeasures continuum_to_measure(const ContinuumField& field);

struct FixedPointReport {
  std::size_t iterations = 0;
  std::vector<double> defects;       // sup distance between successive iterates
  std::vector<double> wall_seconds;  // per iterate
  /// Window end times when the horizon was split; empty for a direct solve.
  std::vector<double> windows;
  double final_defect() const { return defects.empty() ? 0.0 : defects.back(); }
};

struct FixedPointResult {
  LabeledPathMeasure measure;
  FixedPointReport report;
};

/// Picard iteration mu^{j+1} = (Y[mu^j], id)# mu0 from constant paths,
/// stopping once the defect is <= tol. Throws ConvergenceError after
/// max_iter iterations.
FixedPointResult fixed_point_iterate(const MemoryKernel& kernel, const Graphon& graphon,
                                     const LabeledPointMeasure& mu0,
                                     const TimeGrid& grid, double tol,
                                     std::size_t max_iter);

/// Picard iteration on growing horizons [0, window], [0, 2 window], ...,
/// each warm-started from the previous window's fixed point held constant
/// past its end. max_iter applies per window.
FixedPointResult fixed_point_iterate_windowed(const MemoryKernel& kernel,
                                              const Graphon& graphon,
                                              const LabeledPointMeasure& mu0,
                                              const TimeGrid& grid, double tol,
                                              std::size_t max_iter,
                                              double window = 0.5);

/// Test functions phi(zeta, x) with exact zeta-gradient.
struct TestFunction {
  enum class Kind { one, coordinate, square, bump_coordinate };
  Kind kind = Kind::one;
  std::size_t index = 0;  // coordinate i

  static TestFunction one() { return {Kind::one, 0}; }
  static TestFunction coordinate(std::size_t i) { return {Kind::coordinate, i}; }
  static TestFunction square(std::size_t i) { return {Kind::square, i}; }
  /// sin^2(pi x) zeta_i
  static TestFunction bump_coordinate(std::size_t i) { return {Kind::bump_coordinate, i}; }

  double value(std::span<const double> zeta, double x) const;
  /// d phi / d zeta_c
  double gradient(std::span<const double> zeta, double x, std::size_t c) const;
  std::string name() const;
};

struct WeakResidual {
  double value;
  /// True when t is a boundary node and the time derivative is a one-sided
  /// second-order difference instead of the centered one.
  bool one_sided;
};

/// |d/dt int phi d(e_t, id)# mu - int int grad phi . K_t(W(x,y), r_t g1, r_t g2) dmu dmu|.
WeakResidual weak_form_residual(const LabeledPathMeasure& mu, const MemoryKernel& kernel,
                                const Graphon& graphon, const TestFunction& test,
                                double t);

/// m iid draws per block from the block-averaged laws (stream k of
/// CounterRng(seed) for block k), labels at the fine cell centers, weights
/// from sample_averaged(g, n) constant on blocks, then simulate_memory.
Ensemble sample_block_system(const InitialLaw& law, std::size_t n, std::size_t m,
                             std::uint64_t seed, const Graphon& graphon,
                             const MemoryKernel& kernel, const TimeGrid& grid);

/// The initial states drawn by sample_block_system, blockwise.
StateList sample_block_states(const InitialLaw& law, std::size_t n, std::size_t m,
                              std::uint64_t seed);

/// Fiber i: uniform measure on trajectories i*m .. i*m + m - 1.
FiberedMeasure local_empirical_measure(const Ensemble& ensemble, std::size_t n,
                                       std::size_t m);

/// e^{L_K t} dzeta + L_W (e^{L_K t} - 1) dx.
double lipschitz_flow_bound(double l_k, double l_w, double dzeta, double dx, double t);

}  // namespace coevolve
