#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "coevolve/trajectory.hpp"

namespace coevolve {

/// Atoms whose masses deviate from 1 by more than this are rejected.
inline constexpr double kMassTolerance = 1e-10;

/// Finitely supported measure on R^d x I.
class LabeledPointMeasure {
 public:
  /// `atoms` is atom-major (M x dim). Masses are nonnegative; zero-mass
  /// atoms are allowed.
  LabeledPointMeasure(std::size_t dim, std::vector<double> atoms,
                      std::vector<double> labels, std::vector<double> masses);

  static LabeledPointMeasure uniform(std::size_t dim, std::vector<double> atoms,
                                     std::vector<double> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> atom(std::size_t j) const {
    return {atoms_.data() + j * dim_, dim_};
  }
  std::span<const double> atoms() const noexcept { return atoms_; }
  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double mass_defect() const noexcept;

 private:
  std::size_t dim_;
  std::vector<double> atoms_;
  std::vector<double> labels_;
  std::vector<double> masses_;
};

/// Finitely supported measure on C([0,T], R^d) x I.
class LabeledPathMeasure {
 public:
  LabeledPathMeasure(std::vector<Trajectory> paths, std::vector<double> labels,
                     std::vector<double> masses);

  /// Uniform masses 1/N on an ensemble.
  static LabeledPathMeasure empirical(const Ensemble& ensemble);

  std::size_t size() const noexcept { return paths_.size(); }
  std::size_t dim() const noexcept { return paths_.front().dim(); }
  const TimeGrid& grid() const noexcept { return paths_.front().grid(); }
  const Trajectory& path(std::size_t j) const { return paths_[j]; }
  const std::vector<Trajectory>& paths() const noexcept { return paths_; }
  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double mass_defect() const noexcept;

  /// (e_t, id)# of this measure.
  LabeledPointMeasure at_time(double t) const;

 private:
  std::vector<Trajectory> paths_;
  std::vector<double> labels_;
  std::vector<double> masses_;
};

/// Piecewise-constant fiber family over the uniform n-partition of I:
/// fiber i is the law on path space for every x in [i/n, (i+1)/n).
class FiberedMeasure {
 public:
  explicit FiberedMeasure(std::vector<LabeledPathMeasure> fibers);

  std::size_t blocks() const noexcept { return fibers_.size(); }
  const LabeledPathMeasure& fiber(std::size_t i) const { return fibers_[i]; }
  const std::vector<LabeledPathMeasure>& fibers() const noexcept { return fibers_; }

  /// The same family on the n_fine-partition; n_fine must be a multiple of
  /// blocks(). The fibered distance is invariant under refinement.
  FiberedMeasure refine(std::size_t n_fine) const;

 private:
  std::vector<LabeledPathMeasure> fibers_;
};

/// u(., x_j) on the cell centers x_j = (j + 1/2) / n_x.
class ContinuumField {
 public:
  ContinuumField(std::vector<double> xgrid, std::vector<Trajectory> values);

  std::size_t size() const noexcept { return xgrid_.size(); }
  const TimeGrid& grid() const noexcept { return values_.front().grid(); }
  const std::vector<double>& xgrid() const noexcept { return xgrid_; }
  const Trajectory& at(std::size_t j) const { return values_[j]; }
  const std::vector<Trajectory>& values() const noexcept { return values_; }

 private:
  std::vector<double> xgrid_;
  std::vector<Trajectory> values_;
};

/// Columns t,x,v0..v{d-1}, node-major then x.
void write_continuum_csv(std::ostream& os, const ContinuumField& field);

/// Columns t,particle,x_label,mass,v0..; one row per atom and node.
void write_path_measure_csv(std::ostream& os, const LabeledPathMeasure& measure);

}  // namespace coevolve
