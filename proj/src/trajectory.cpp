#include "coevolve/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "coevolve/error.hpp"

namespace coevolve {

TimeGrid::TimeGrid(double t_end, std::size_t steps)
    : h_(0.0), steps_(steps), t_end_(t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw DomainError(fmt::format("time grid needs t_end > 0, got {}", t_end));
  if (steps == 0) throw DomainError("time grid needs at least one step");
  h_ = t_end / static_cast<double>(steps);
}

TimeGrid::TimeGrid(double h, std::size_t steps, double t_end)
    : h_(h), steps_(steps), t_end_(t_end) {}

double TimeGrid::node(std::size_t i) const {
  if (i > steps_)
    throw DomainError(fmt::format("node {} beyond grid of {} steps", i, steps_));
  if (i == steps_) return t_end_;
  return static_cast<double>(i) * h_;
}

std::size_t TimeGrid::node_index(double t) const {
  if (!(t >= 0.0) || t > t_end_ * (1.0 + 1e-12))
    throw DomainError(
        fmt::format("time {} outside [0, {}]", t, t_end_));
  const double pos = t / h_;
  const auto i = static_cast<std::size_t>(std::llround(pos));
  const std::size_t clamped = std::min(i, steps_);
  if (std::abs(node(clamped) - t) > 1e-9 * h_)
    throw AlignmentError(
        fmt::format("time {} is not a grid node (h = {})", t, h_));
  return clamped;
}

TimeGrid TimeGrid::prefix(std::size_t index) const {
  if (index == 0) throw DomainError("cannot restrict to a zero-length grid");
  if (index > steps_)
    throw DomainError(fmt::format("prefix {} beyond {} steps", index, steps_));
  return TimeGrid(h_, index, node(index));
}

Trajectory::Trajectory(TimeGrid grid, std::size_t dim,
                       std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw ShapeError("trajectory dimension must be positive");
  if (values_.size() != grid_.nodes() * dim_)
    throw ShapeError(fmt::format("trajectory holds {} values, grid needs {}",
                                 values_.size(), grid_.nodes() * dim_));
  for (double v : values_)
    if (!std::isfinite(v)) throw ValidationError("trajectory value not finite");
}

Trajectory Trajectory::constant(TimeGrid grid, std::span<const double> value) {
  std::vector<double> values;
  values.reserve(grid.nodes() * value.size());
  for (std::size_t i = 0; i < grid.nodes(); ++i)
    values.insert(values.end(), value.begin(), value.end());
  return Trajectory(grid, value.size(), std::move(values));
}

std::span<const double> Trajectory::at_node(std::size_t i) const {
  if (i >= grid_.nodes())
    throw DomainError(fmt::format("node {} beyond trajectory", i));
  return std::span<const double>(values_).subspan(i * dim_, dim_);
}

TrajectoryBuilder::TrajectoryBuilder(TimeGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim) {
  if (dim_ == 0) throw ShapeError("trajectory dimension must be positive");
  values_.reserve(grid_.nodes() * dim_);
}

void TrajectoryBuilder::append(std::span<const double> value) {
  if (value.size() != dim_) throw ShapeError("appended value has wrong dim");
  if (size() >= grid_.nodes()) throw ShapeError("trajectory already complete");
  values_.insert(values_.end(), value.begin(), value.end());
}

std::span<const double> TrajectoryBuilder::last() const {
  if (values_.empty()) throw ShapeError("empty trajectory builder");
  return std::span<const double>(values_).subspan(values_.size() - dim_, dim_);
}

Trajectory TrajectoryBuilder::finish() && {
  return Trajectory(grid_, dim_, std::move(values_));
}

std::vector<double> evaluate(const Trajectory& traj, double t) {
  const TimeGrid& grid = traj.grid();
  if (!(t >= 0.0) || t > grid.t_end())
    throw DomainError(fmt::format("evaluation time {} outside [0, {}]", t,
                                  grid.t_end()));
  const double h = grid.step_size();
  auto i = static_cast<std::size_t>(std::floor(t / h));
  if (i >= grid.steps()) i = grid.steps() - 1;
  // floor(t/h) may land one node off when t/h rounds across an integer.
  while (i > 0 && grid.node(i) > t) --i;
  while (i + 1 < grid.nodes() && grid.node(i + 1) <= t) ++i;
  auto left = traj.at_node(i);
  if (grid.node(i) == t || i + 1 >= grid.nodes())
    return {left.begin(), left.end()};
  auto right = traj.at_node(i + 1);
  const double lambda = (t - grid.node(i)) / (grid.node(i + 1) - grid.node(i));
  std::vector<double> out(traj.dim());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = left[c] + lambda * (right[c] - left[c]);
  return out;
}

Trajectory restrict(const Trajectory& traj, double t) {
  const std::size_t index = traj.grid().node_index(t);
  if (index == traj.grid().steps()) return traj;
  auto values = traj.values();
  std::vector<double> prefix(values.begin(),
                             values.begin() + (index + 1) * traj.dim());
  return Trajectory(traj.grid().prefix(index), traj.dim(), std::move(prefix));
}

namespace {

void require_compatible(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid() == b.grid()))
    throw ShapeError("trajectories live on different grids");
  if (a.dim() != b.dim())
    throw ShapeError(fmt::format("trajectory dims differ ({} vs {})", a.dim(),
                                 b.dim()));
}

double sup_up_to(const Trajectory& a, const Trajectory& b, std::size_t last) {
  double best = 0.0;
  const std::size_t d = a.dim();
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i <= last; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = va[i * d + c] - vb[i * d + c];
      sq += diff * diff;
    }
    best = std::max(best, d == 1 ? std::abs(va[i] - vb[i]) : std::sqrt(sq));
  }
  return best;
}

}  // namespace

double sup_distance(const Trajectory& a, const Trajectory& b, double t) {
  require_compatible(a, b);
  return sup_up_to(a, b, a.grid().node_index(t));
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  require_compatible(a, b);
  return sup_up_to(a, b, a.grid().steps());
}

Ensemble::Ensemble(std::vector<Trajectory> trajectories,
                   std::vector<double> labels)
    : trajectories_(std::move(trajectories)), labels_(std::move(labels)) {
  if (trajectories_.empty()) throw ShapeError("empty ensemble");
  if (labels_.size() != trajectories_.size())
    throw ShapeError("ensemble needs one label per trajectory");
  for (const auto& tr : trajectories_) {
    if (!(tr.grid() == trajectories_.front().grid()) ||
        tr.dim() != trajectories_.front().dim())
      throw ShapeError("ensemble trajectories must share grid and dim");
  }
  for (double x : labels_)
    if (!(x >= 0.0 && x < 1.0))
      throw DomainError(fmt::format("label {} outside [0, 1)", x));
}

double max_sup_distance(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size()) throw ShapeError("ensemble sizes differ");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    best = std::max(best, sup_distance(a[k], b[k]));
  return best;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (std::size_t c = 0; c < traj.dim(); ++c) os << ",v" << c;
  os << '\n';
  for (std::size_t i = 0; i < traj.grid().nodes(); ++i) {
    fmt::print(os, "{:.17g}", traj.grid().node(i));
    for (double v : traj.at_node(i)) fmt::print(os, ",{:.17g}", v);
    os << '\n';
  }
}

void write_ensemble_csv(std::ostream& os, const Ensemble& ensemble) {
  os << "t,particle,x_label";
  for (std::size_t c = 0; c < ensemble.dim(); ++c) os << ",v" << c;
  os << '\n';
  const TimeGrid& grid = ensemble.grid();
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      fmt::print(os, "{:.17g},{},{:.17g}", grid.node(i), k,
                 ensemble.labels()[k]);
      for (double v : ensemble[k].at_node(i)) fmt::print(os, ",{:.17g}", v);
      os << '\n';
    }
  }
}

}  // namespace coevolve
