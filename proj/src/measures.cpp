#include "coevolve/measures.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

void validate_labels_masses(const std::vector<double>& labels,
                            const std::vector<double>& masses, std::size_t count) {
  if (count == 0) throw DomainError("measure needs at least one atom");
  if (labels.size() != count || masses.size() != count)
    throw ShapeError(fmt::format("measure with {} atoms got {} labels and {} masses",
                                 count, labels.size(), masses.size()));
  double total = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    if (!(labels[j] >= 0.0 && labels[j] < 1.0))
      throw ValidationError(fmt::format("label {} outside [0, 1)", labels[j]));
    if (!(masses[j] >= 0.0) || !std::isfinite(masses[j]))
      throw ValidationError(fmt::format("mass {} of atom {} invalid", masses[j], j));
    total += masses[j];
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw ValidationError(fmt::format("masses sum to {}, not 1", total));
}

double defect(const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  return std::abs(total - 1.0);
}

}  // namespace

LabeledPointMeasure::LabeledPointMeasure(std::size_t dim, std::vector<double> atoms,
                                         std::vector<double> labels,
                                         std::vector<double> masses)
    : dim_(dim),
      atoms_(std::move(atoms)),
      labels_(std::move(labels)),
      masses_(std::move(masses)) {
  if (dim_ == 0) throw ShapeError("measure dimension must be >= 1");
  if (atoms_.size() % dim_ != 0 || atoms_.size() / dim_ != labels_.size())
    throw ShapeError(fmt::format("{} atom values do not form {} atoms of dimension {}",
                                 atoms_.size(), labels_.size(), dim_));
  for (double v : atoms_)
    if (!std::isfinite(v)) throw ValidationError("measure atom not finite");
  validate_labels_masses(labels_, masses_, labels_.size());
}

LabeledPointMeasure LabeledPointMeasure::uniform(std::size_t dim,
                                                 std::vector<double> atoms,
                                                 std::vector<double> labels) {
  const std::size_t m = labels.size();
  std::vector<double> masses(m, m ? 1.0 / static_cast<double>(m) : 0.0);
  return LabeledPointMeasure(dim, std::move(atoms), std::move(labels), std::move(masses));
}

double LabeledPointMeasure::mass_defect() const noexcept { return defect(masses_); }

LabeledPathMeasure::LabeledPathMeasure(std::vector<Trajectory> paths,
                                       std::vector<double> labels,
                                       std::vector<double> masses)
    : paths_(std::move(paths)), labels_(std::move(labels)), masses_(std::move(masses)) {
  validate_labels_masses(labels_, masses_, paths_.size());
  for (const auto& p : paths_)
    if (!(p.grid() == paths_.front().grid()) || p.dim() != paths_.front().dim())
      throw ShapeError("path measure atoms must share grid and dimension");
}

LabeledPathMeasure LabeledPathMeasure::empirical(const Ensemble& ensemble) {
  const std::size_t n = ensemble.size();
  return LabeledPathMeasure(ensemble.trajectories(), ensemble.labels(),
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double LabeledPathMeasure::mass_defect() const noexcept { return defect(masses_); }

LabeledPointMeasure LabeledPathMeasure::at_time(double t) const {
  const std::size_t d = dim();
  std::vector<double> atoms;
  atoms.reserve(size() * d);
  for (const auto& p : paths_) {
    const auto v = evaluate(p, t);
    atoms.insert(atoms.end(), v.begin(), v.end());
  }
  return LabeledPointMeasure(d, std::move(atoms), labels_, masses_);
}

FiberedMeasure::FiberedMeasure(std::vector<LabeledPathMeasure> fibers)
    : fibers_(std::move(fibers)) {
  if (fibers_.empty()) throw DomainError("fibered measure needs at least one block");
  for (const auto& f : fibers_)
    if (!(f.grid() == fibers_.front().grid()) || f.dim() != fibers_.front().dim())
      throw ShapeError("fibers must share grid and dimension");
}

FiberedMeasure FiberedMeasure::refine(std::size_t n_fine) const {
  const std::size_t n = blocks();
  if (n_fine == 0 || n_fine % n != 0)
    throw ValidationError(
        fmt::format("cannot refine {} blocks to {} blocks", n, n_fine));
  std::vector<LabeledPathMeasure> fine;
  fine.reserve(n_fine);
  for (std::size_t i = 0; i < n_fine; ++i) fine.push_back(fibers_[i / (n_fine / n)]);
  return FiberedMeasure(std::move(fine));
}

ContinuumField::ContinuumField(std::vector<double> xgrid, std::vector<Trajectory> values)
    : xgrid_(std::move(xgrid)), values_(std::move(values)) {
  if (xgrid_.empty()) throw DomainError("continuum field needs at least one node");
  if (xgrid_.size() != values_.size())
    throw ShapeError("continuum field needs one trajectory per x node");
  for (const auto& v : values_)
    if (!(v.grid() == values_.front().grid()) || v.dim() != values_.front().dim())
      throw ShapeError("continuum field trajectories must share grid and dimension");
}

void write_continuum_csv(std::ostream& os, const ContinuumField& field) {
  const std::size_t d = field.at(0).dim();
  os << "t,x";
  for (std::size_t c = 0; c < d; ++c) fmt::print(os, ",v{}", c);
  os << '\n';
  const TimeGrid& grid = field.grid();
  for (std::size_t i = 0; i < grid.nodes(); ++i)
    for (std::size_t j = 0; j < field.size(); ++j) {
      fmt::print(os, "{:.17g},{:.17g}", grid.node(i), field.xgrid()[j]);
      for (double v : field.at(j).at_node(i)) fmt::print(os, ",{:.17g}", v);
      os << '\n';
    }
}

void write_path_measure_csv(std::ostream& os, const LabeledPathMeasure& measure) {
  const std::size_t d = measure.dim();
  os << "t,particle,x_label,mass";
  for (std::size_t c = 0; c < d; ++c) fmt::print(os, ",v{}", c);
  os << '\n';
  const TimeGrid& grid = measure.grid();
  for (std::size_t i = 0; i < grid.nodes(); ++i)
    for (std::size_t j = 0; j < measure.size(); ++j) {
      fmt::print(os, "{:.17g},{},{:.17g},{:.17g}", grid.node(i), j,
                 measure.labels()[j], measure.masses()[j]);
      for (double v : measure.path(j).at_node(i)) fmt::print(os, ",{:.17g}", v);
      os << '\n';
    }
}

}  // namespace coevolve
