#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "coevolve/measures.hpp"

namespace coevolve {

/// Per-side atom cap of the exact solvers.
inline constexpr std::size_t kMaxTransportAtoms = 2048;

/// Distance on R^d x I.
struct ProductMetric {
  enum class Mode { euclidean_product, state_only };
  Mode mode = Mode::euclidean_product;

  static ProductMetric product() { return {Mode::euclidean_product}; }
  static ProductMetric state_only() { return {Mode::state_only}; }

  /// hypot(state, label) or state alone.
  double combine(double state_distance, double label_distance) const noexcept;
  double operator()(std::span<const double> a, double xa, std::span<const double> b,
                    double xb) const noexcept;
};

struct PlanEntry {
  std::size_t i;
  std::size_t j;
  double mass;
  double cost_contribution;
};

struct TransportPlan {
  /// Sorted by (i, j); zero-mass basic cells are omitted.
  std::vector<PlanEntry> entries;
  double cost = 0.0;
  /// Input masses deviated from 1 (within tolerance) and were rescaled.
  bool renormalized = false;
};

struct TransportResult {
  double distance;
  TransportPlan plan;
};

/// Exact discrete optimal transport for a row-major rows x cols cost matrix.
/// Equal-size uniform masses go through an assignment solver whose optimal
/// matching is refined to the lexicographically smallest one; the cost is
/// then (sum_i c_{i sigma(i)}) / M summed in row order. Other masses use a
/// transportation simplex started from the north-west corner.
TransportResult solve_transport(std::span<const double> cost, std::span<const double> a,
                                std::span<const double> b);

TransportResult wasserstein1_exact(const LabeledPointMeasure& a,
                                   const LabeledPointMeasure& b,
                                   ProductMetric metric = ProductMetric::product());

/// (1/M) sum_i |a_(i) - b_(i)| over sorted samples.
double wasserstein1_sorted_1d(std::span<const double> a, std::span<const double> b);

/// Path metric hypot(||g - g'||_{C([0,T])}, |x - x'|) (or the sup distance
/// alone for state_only).
TransportResult path_wasserstein1(const LabeledPathMeasure& a, const LabeledPathMeasure& b,
                                  ProductMetric metric = ProductMetric::product());

/// (1/n) sum_i W1(a_i, b_i) over fibers, on path space with the sup distance.
double dist_fibered(const FiberedMeasure& a, const FiberedMeasure& b);

/// Same for the time-t marginals of the fibers.
double dist_fibered(const FiberedMeasure& a, const FiberedMeasure& b, double t);

/// Columns i,j,mass,cost_contribution.
void write_transport_plan_csv(std::ostream& os, const TransportPlan& plan);

}  // namespace coevolve
