#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coevolve/catalog.hpp"
#include "coevolve/trajectory.hpp"

namespace coevolve {

/// Read-only window on one atom's history r_t f with t = node(horizon).
/// The value at `horizon` comes from `tip`, which lets the corrector stage
/// append a predicted endpoint without touching the accepted store.
class HistoryView {
 public:
  HistoryView(const double* accepted, std::size_t dim, std::size_t horizon,
              const double* tip) noexcept
      : accepted_(accepted), dim_(dim), horizon_(horizon), tip_(tip) {}

  std::span<const double> at(std::size_t node) const {
#ifndef NDEBUG
    guard(node);
#endif
    return {node == horizon_ ? tip_ : accepted_ + node * dim_, dim_};
  }
  std::span<const double> current() const noexcept { return {tip_, dim_}; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  void guard(std::size_t node) const;

  const double* accepted_;
  std::size_t dim_;
  std::size_t horizon_;
  const double* tip_;
};

struct KernelConstants {
  double lipschitz;  // L_K
  double sup_bound;  // sup |K_t|
};

/// Catalog of functionals K_t(a, r_t f, r_t g).
class MemoryKernel {
 public:
  enum class Kind { constant, instantaneous, flow, duhamel };

  /// K = c
  static MemoryKernel constant(double c);
  /// K = C(e_t f, e_t g), ignoring the initial weight.
  static MemoryKernel instantaneous(PairFunction coupling);
  /// K = Phi_t[a, f, g] * C(e_t f, e_t g) with Phi the flow of w' = F.
  static MemoryKernel flow(PairFunction coupling, WeightDynamics dynamics);
  /// K = (a e^{-decay t} + int_0^t g(f_s, g_s) e^{-decay (t - s)} ds) C(...)
  static MemoryKernel duhamel(PairFunction coupling, double decay,
                              PairFunction forcing);

  /// `zero`, `constant:<c>`, `instantaneous:<C>`, `flow:<C>:<F>`,
  /// `duhamel:<a>:<g>[:<C>]` (C defaults to kuramoto).
  static MemoryKernel parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  bool has_memory() const noexcept {
    return kind_ == Kind::flow || kind_ == Kind::duhamel;
  }
  const PairFunction& coupling() const noexcept { return coupling_; }
  const WeightDynamics& dynamics() const noexcept { return dynamics_; }
  double value() const noexcept { return value_; }
  double decay() const noexcept { return dynamics_.rate(); }
  const PairFunction& forcing() const noexcept { return dynamics_.forcing(); }

  /// Lipschitz and sup bounds on [0, horizon] for initial weights with
  /// |a| <= weight_bound. Memory kernels use
  /// e^{L_F T} (max(1, B) L_C + |C|_inf max(1, L_F T)), B the weight bound.
  KernelConstants constants(double horizon, double weight_bound = 1.0) const;

  std::string name() const;

 private:
  MemoryKernel(Kind kind, PairFunction coupling, WeightDynamics dynamics,
               double value)
      : kind_(kind), coupling_(coupling), dynamics_(dynamics), value_(value) {}

  Kind kind_;
  PairFunction coupling_;
  WeightDynamics dynamics_;
  double value_;
};

/// K_t(w0, f, g) = Phi_t[w0, f, g] C(e_t f, e_t g).
MemoryKernel kernel_from_flow(PairFunction coupling, WeightDynamics dynamics);

/// Duhamel form of the flow kernel for F = -a w + g; throws DomainError for
/// a <= 0.
MemoryKernel kernel_duhamel(PairFunction coupling, double decay,
                            PairFunction forcing);

/// One Heun step of w' = F(w, f, g) from (f0, g0) to (f1, g1).
double heun_weight_step(const WeightDynamics& dynamics, double w, double h,
                        std::span<const double> f0, std::span<const double> g0,
                        std::span<const double> f1, std::span<const double> g1);

/// Per-pair kernel memory for one integration run over rows x cols pairs.
///
/// Pair state (the flow-map weight or the Duhamel convolution) is held at
/// the committed node c. evaluate() accepts horizon c (from the state) or
/// c + 1 (one tentative step off the state); commit() advances a pair to
/// c + 1 with accepted values, and advance() closes the step. Rows are
/// independent, so workers owning disjoint rows may evaluate and commit
/// concurrently. Paranoid mode re-integrates every evaluation from node 0.
class KernelWorkspace {
 public:
  KernelWorkspace(const MemoryKernel& kernel, const TimeGrid& grid,
                  std::size_t rows, std::size_t cols,
                  std::span<const double> initial_weights,
                  bool paranoid = false);

  double evaluate(std::size_t row, std::size_t col, const HistoryView& self,
                  const HistoryView& other) const;
  void commit(std::size_t row, std::size_t col, const HistoryView& self,
              const HistoryView& other);
  void advance() noexcept { ++committed_; }

  std::size_t committed() const noexcept { return committed_; }
  double initial_weight(std::size_t row, std::size_t col) const noexcept {
    return weights_[row * cols_ + col];
  }

 private:
  double weight_from_scratch(std::size_t row, std::size_t col,
                             const HistoryView& self,
                             const HistoryView& other) const;
  double step_state(double state, std::size_t from, const HistoryView& self,
                    const HistoryView& other) const;
  double weight_of_state(double state, std::size_t row, std::size_t col,
                         std::size_t node) const;

  MemoryKernel kernel_;
  TimeGrid grid_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> weights_;
  std::vector<double> state_;
  std::vector<double> decay_table_;  // e^{-a t_i} for Duhamel kernels
  double step_decay_ = 1.0;          // e^{-a h}
  std::size_t committed_ = 0;
  bool paranoid_;
};

}  // namespace coevolve
