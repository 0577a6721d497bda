#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace coevolve {

/// Uniform grid t_i = i * h on [0, t_end]; the last node is t_end exactly.
class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t steps);

  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double step_size() const noexcept { return h_; }
  double node(std::size_t i) const;

  /// Index of the node equal to t (within 1e-9 h); throws AlignmentError
  /// when t falls between nodes and DomainError when t is outside [0, t_end].
  std::size_t node_index(double t) const;

  /// Grid of the first `index` steps, with nodes identical to this grid's.
  TimeGrid prefix(std::size_t index) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  TimeGrid(double h, std::size_t steps, double t_end);

  double h_;
  std::size_t steps_;
  double t_end_;
};

/// A sampled path in R^d, one value per grid node, linearly interpolated
/// between nodes.
class Trajectory {
 public:
  /// `values` is node-major: values[i * dim + c].
  Trajectory(TimeGrid grid, std::size_t dim, std::vector<double> values);

  static Trajectory constant(TimeGrid grid, std::span<const double> value);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> at_node(std::size_t i) const;
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Trajectory&) const = default;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Append-only builder used by integrators; finish() hands out an immutable
/// Trajectory.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(TimeGrid grid, std::size_t dim);

  void append(std::span<const double> value);
  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::span<const double> last() const;
  Trajectory finish() &&;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// e_t: value at time t, exact on nodes, linear in between.
std::vector<double> evaluate(const Trajectory& traj, double t);

/// r_t: prefix on [0, t]; t must be a grid node.
Trajectory restrict(const Trajectory& traj, double t);

/// ||a - b||_{C([0,t])} over grid nodes with Euclidean norm per node.
double sup_distance(const Trajectory& a, const Trajectory& b, double t);

/// Same as sup_distance over the whole grid.
double sup_distance(const Trajectory& a, const Trajectory& b);

/// N trajectories on a common grid with labels x^{N,k} in [0, 1).
class Ensemble {
 public:
  Ensemble(std::vector<Trajectory> trajectories, std::vector<double> labels);

  std::size_t size() const noexcept { return trajectories_.size(); }
  std::size_t dim() const noexcept { return trajectories_.front().dim(); }
  const TimeGrid& grid() const noexcept { return trajectories_.front().grid(); }
  const Trajectory& operator[](std::size_t k) const { return trajectories_[k]; }
  const std::vector<Trajectory>& trajectories() const noexcept {
    return trajectories_;
  }
  const std::vector<double>& labels() const noexcept { return labels_; }

 private:
  std::vector<Trajectory> trajectories_;
  std::vector<double> labels_;
};

/// max_k ||a_k - b_k||_{C([0,T])}.
double max_sup_distance(const Ensemble& a, const Ensemble& b);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Long format: t,particle,x_label,v0..v{d-1}.
void write_ensemble_csv(std::ostream& os, const Ensemble& ensemble);

}  // namespace coevolve
