#include "coevolve/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "coevolve/error.hpp"

namespace coevolve {

void HistoryView::guard(std::size_t node) const {
  if (node > horizon_)
    throw DomainError(fmt::format(
        "kernel read node {} beyond history horizon {}", node, horizon_));
}

MemoryKernel MemoryKernel::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant kernel must be finite");
  return {Kind::constant, PairFunction::constant(0.0),
          WeightDynamics::constant(0.0), c};
}

MemoryKernel MemoryKernel::instantaneous(PairFunction coupling) {
  return {Kind::instantaneous, coupling, WeightDynamics::constant(0.0), 0.0};
}

MemoryKernel MemoryKernel::flow(PairFunction coupling, WeightDynamics dynamics) {
  return {Kind::flow, coupling, dynamics, 0.0};
}

MemoryKernel MemoryKernel::duhamel(PairFunction coupling, double decay,
                                   PairFunction forcing) {
  if (!(decay > 0.0))
    throw DomainError(fmt::format("Duhamel kernel needs a > 0, got {}", decay));
  return {Kind::duhamel, coupling, WeightDynamics::linear(decay, forcing), 0.0};
}

MemoryKernel kernel_from_flow(PairFunction coupling, WeightDynamics dynamics) {
  return MemoryKernel::flow(coupling, dynamics);
}

MemoryKernel kernel_duhamel(PairFunction coupling, double decay,
                            PairFunction forcing) {
  return MemoryKernel::duhamel(coupling, decay, forcing);
}

MemoryKernel MemoryKernel::parse(std::string_view name) {
  const auto tokens = detail::split_name(name);
  std::size_t pos = 0;
  const std::string& head = tokens[pos++];
  MemoryKernel kernel = MemoryKernel::constant(0.0);
  if (head == "zero") {
  } else if (head == "constant") {
    if (pos >= tokens.size())
      throw ConfigError(fmt::format("constant kernel needs a value: '{}'", name));
    kernel = MemoryKernel::constant(detail::parse_number(tokens[pos++], name));
  } else if (head == "instantaneous") {
    kernel = MemoryKernel::instantaneous(detail::consume_pair(tokens, pos, name));
  } else if (head == "flow") {
    const PairFunction c = detail::consume_pair(tokens, pos, name);
    kernel = MemoryKernel::flow(c, detail::consume_weight(tokens, pos, name));
  } else if (head == "duhamel") {
    if (pos >= tokens.size())
      throw ConfigError(fmt::format("duhamel kernel needs a rate: '{}'", name));
    const double a = detail::parse_number(tokens[pos++], name);
    if (!(a > 0.0))
      throw ConfigError(fmt::format("duhamel rate must be > 0: '{}'", name));
    const PairFunction g = detail::consume_pair(tokens, pos, name);
    PairFunction c = PairFunction::kuramoto();
    if (pos < tokens.size()) c = detail::consume_pair(tokens, pos, name);
    kernel = MemoryKernel::duhamel(c, a, g);
  } else {
    throw ConfigError(fmt::format("unknown kernel '{}'", name));
  }
  if (pos != tokens.size())
    throw ConfigError(fmt::format("trailing tokens in kernel '{}'", name));
  return kernel;
}

namespace {

// 0 * inf = 0: a vanishing Lipschitz factor kills an unbounded companion.
double safe_mul(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

}  // namespace

KernelConstants MemoryKernel::constants(double horizon,
                                        double weight_bound) const {
  switch (kind_) {
    case Kind::constant:
      return {0.0, std::abs(value_)};
    case Kind::instantaneous:
      return {coupling_.lipschitz(), coupling_.sup_bound()};
    case Kind::flow:
    case Kind::duhamel: {
      const double lf = dynamics_.lipschitz();
      const double growth = std::exp(lf * horizon);
      const double phi_max = dynamics_.weight_bound(weight_bound, horizon);
      const double c_sup = coupling_.sup_bound();
      const double lk =
          growth * (safe_mul(std::max(1.0, phi_max), coupling_.lipschitz()) +
                    safe_mul(c_sup, std::max(1.0, lf * horizon)));
      return {lk, safe_mul(c_sup, phi_max)};
    }
  }
  return {std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
}

std::string MemoryKernel::name() const {
  switch (kind_) {
    case Kind::constant:
      return fmt::format("constant:{}", value_);
    case Kind::instantaneous:
      return "instantaneous:" + coupling_.name();
    case Kind::flow:
      return fmt::format("flow:{}:{}", coupling_.name(), dynamics_.name());
    case Kind::duhamel:
      return fmt::format("duhamel:{}:{}:{}", decay(), forcing().name(),
                         coupling_.name());
  }
  return "unknown";
}

double heun_weight_step(const WeightDynamics& dynamics, double w, double h,
                        std::span<const double> f0, std::span<const double> g0,
                        std::span<const double> f1,
                        std::span<const double> g1) {
  const double k1 = dynamics(w, f0, g0);
  const double k2 = dynamics(w + h * k1, f1, g1);
  return w + 0.5 * h * (k1 + k2);
}

KernelWorkspace::KernelWorkspace(const MemoryKernel& kernel,
                                 const TimeGrid& grid, std::size_t rows,
                                 std::size_t cols,
                                 std::span<const double> initial_weights,
                                 bool paranoid)
    : kernel_(kernel),
      grid_(grid),
      rows_(rows),
      cols_(cols),
      weights_(initial_weights.begin(), initial_weights.end()),
      paranoid_(paranoid) {
  if (weights_.size() != rows * cols)
    throw ShapeError(fmt::format("kernel workspace expects {} weights, got {}",
                                 rows * cols, weights_.size()));
  if (kernel_.kind() == MemoryKernel::Kind::flow) {
    state_ = weights_;
  } else if (kernel_.kind() == MemoryKernel::Kind::duhamel) {
    state_.assign(rows * cols, 0.0);
    decay_table_.resize(grid_.nodes());
    for (std::size_t i = 0; i < grid_.nodes(); ++i)
      decay_table_[i] = std::exp(-kernel_.decay() * grid_.node(i));
    step_decay_ = std::exp(-kernel_.decay() * grid_.step_size());
  }
}

double KernelWorkspace::step_state(double state, std::size_t from,
                                   const HistoryView& self,
                                   const HistoryView& other) const {
  const double h = grid_.step_size();
  if (kernel_.kind() == MemoryKernel::Kind::flow)
    return heun_weight_step(kernel_.dynamics(), state, h, self.at(from),
                            other.at(from), self.at(from + 1),
                            other.at(from + 1));
  const PairFunction& g = kernel_.forcing();
  const double g0 = g(self.at(from), other.at(from));
  const double g1 = g(self.at(from + 1), other.at(from + 1));
  return step_decay_ * (state + 0.5 * h * g0) + 0.5 * h * g1;
}

double KernelWorkspace::weight_of_state(double state, std::size_t row,
                                        std::size_t col,
                                        std::size_t node) const {
  if (kernel_.kind() == MemoryKernel::Kind::flow) return state;
  return weights_[row * cols_ + col] * decay_table_[node] + state;
}

double KernelWorkspace::weight_from_scratch(std::size_t row, std::size_t col,
                                            const HistoryView& self,
                                            const HistoryView& other) const {
  double state =
      kernel_.kind() == MemoryKernel::Kind::flow ? weights_[row * cols_ + col] : 0.0;
  for (std::size_t i = 0; i < self.horizon(); ++i)
    state = step_state(state, i, self, other);
  return weight_of_state(state, row, col, self.horizon());
}

double KernelWorkspace::evaluate(std::size_t row, std::size_t col,
                                 const HistoryView& self,
                                 const HistoryView& other) const {
  switch (kernel_.kind()) {
    case MemoryKernel::Kind::constant:
      return kernel_.value();
    case MemoryKernel::Kind::instantaneous:
      return kernel_.coupling()(self.current(), other.current());
    case MemoryKernel::Kind::flow:
    case MemoryKernel::Kind::duhamel:
      break;
  }
  const std::size_t horizon = self.horizon();
  double w = 0.0;
  if (paranoid_) {
    w = weight_from_scratch(row, col, self, other);
  } else if (horizon == committed_) {
    w = weight_of_state(state_[row * cols_ + col], row, col, horizon);
  } else if (horizon == committed_ + 1) {
    w = weight_of_state(
        step_state(state_[row * cols_ + col], committed_, self, other), row,
        col, horizon);
  } else {
    throw DomainError(fmt::format(
        "kernel evaluated at node {} with state committed at node {}", horizon,
        committed_));
  }
  return w * kernel_.coupling()(self.current(), other.current());
}

void KernelWorkspace::commit(std::size_t row, std::size_t col,
                             const HistoryView& self,
                             const HistoryView& other) {
  if (!kernel_.has_memory()) return;
  double& state = state_[row * cols_ + col];
  state = step_state(state, committed_, self, other);
}

}  // namespace coevolve
