#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coevolve {

/// Symmetric N x N coupling weights together with the node coordinates
/// x^{N,k} of the particles they connect.
class WeightMatrix {
 public:
  /// `entries` is row-major. Throws ValidationError when the entries are not
  /// symmetric or the nodes are not strictly increasing in [0, 1).
  WeightMatrix(std::vector<double> nodes, std::vector<double> entries);

  std::size_t size() const noexcept { return nodes_.size(); }
  double operator()(std::size_t k, std::size_t l) const {
    return entries_[k * nodes_.size() + l];
  }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  std::span<const double> entries() const noexcept { return entries_; }
  double max_abs() const noexcept;

  /// Block expansion: entry ((k,a),(l,b)) = (*this)(k,l) for a,b < factor.
  /// Fine nodes are the cell centers of the (size*factor)-partition.
  WeightMatrix expand_blocks(std::size_t factor) const;

  bool operator==(const WeightMatrix&) const = default;

 private:
  std::vector<double> nodes_;
  std::vector<double> entries_;
};

enum class GraphonFamily { constant, product, min, cosine, threshold, step };

/// A bounded symmetric function on [0,1)^2: either a builtin analytic
/// family or the step function of a weight matrix. Values may be signed.
class Graphon {
 public:
  static Graphon constant(double c);
  /// W(x, y) = x * y
  static Graphon product();
  /// W(x, y) = min(x, y)
  static Graphon min();
  /// W(x, y) = cos(pi (x - y))
  static Graphon cosine();
  /// W(x, y) = 1 if |x - y| <= r else 0; not Lipschitz.
  static Graphon threshold(double r);

  double operator()(double x, double y) const;

  GraphonFamily family() const noexcept { return family_; }
  double parameter() const noexcept { return parameter_; }
  /// L_W with |W(x,y) - W(x',y')| <= L_W hypot(x - x', y - y'); empty for
  /// families without a global Lipschitz constant.
  std::optional<double> lipschitz() const noexcept;
  /// Cellwise values when family() == step.
  const std::optional<WeightMatrix>& step_matrix() const noexcept {
    return step_;
  }
  std::string describe() const;

 private:
  friend Graphon step_graphon(const WeightMatrix& m);
  Graphon(GraphonFamily family, double parameter);

  GraphonFamily family_;
  double parameter_ = 0.0;
  std::optional<WeightMatrix> step_;
};

/// x^{N,k} = (k - 1/2) / N for k = 1..N.
std::vector<double> uniform_nodes(std::size_t n);

/// w_kl = W(x_k, x_l).
WeightMatrix sample_pointwise(const Graphon& g, std::span<const double> nodes);

/// w_kl = N^2 * integral of W over I_k x I_l. Builtin families use a tensor
/// 8-point Gauss-Legendre rule per cell; step graphons are averaged exactly.
WeightMatrix sample_averaged(const Graphon& g, std::size_t n);

/// Piecewise-constant graphon over the uniform partition I_k = [(k-1)/N, k/N).
Graphon step_graphon(const WeightMatrix& m);

/// L^p(I^2) norm of g1 - g2 by the midpoint rule on resolution^2 cells.
double lp_distance(const Graphon& g1, const Graphon& g2, int p,
                   std::size_t resolution);

/// max over probes x of int_I |W(x + delta, y) - W(x, y)| dy (midpoint rule
/// with `probes` points in y; probes in x are cell centers of [0, 1 - delta)).
double continuity_defect(const Graphon& g, double delta, std::size_t probes);

/// First row: nodes. Next N rows: matrix rows.
void write_weight_matrix_csv(std::ostream& os, const WeightMatrix& m);
WeightMatrix read_weight_matrix_csv(std::istream& is);

}  // namespace coevolve
