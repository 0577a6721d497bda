#include "coevolve/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PairFunction PairFunction::kuramoto() { return {Kind::sine, 0.0}; }
PairFunction PairFunction::cosine() { return {Kind::cosine, 0.0}; }
PairFunction PairFunction::linear_attraction() { return {Kind::difference, 0.0}; }
PairFunction PairFunction::tanh() { return {Kind::tanh, 0.0}; }
PairFunction PairFunction::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant pair function must be finite");
  return {Kind::constant, c};
}

double PairFunction::operator()(std::span<const double> phi,
                                std::span<const double> psi) const noexcept {
  switch (kind_) {
    case Kind::sine:
      return std::sin(psi[0] - phi[0]);
    case Kind::cosine:
      return std::cos(psi[0] - phi[0]);
    case Kind::difference:
      return psi[0] - phi[0];
    case Kind::tanh:
      return std::tanh(psi[0] - phi[0]);
    case Kind::constant:
      return parameter_;
  }
  return 0.0;
}

double PairFunction::lipschitz() const noexcept {
  return kind_ == Kind::constant ? 0.0 : 1.0;
}

double PairFunction::sup_bound() const noexcept {
  switch (kind_) {
    case Kind::sine:
    case Kind::cosine:
    case Kind::tanh:
      return 1.0;
    case Kind::difference:
      return kInf;
    case Kind::constant:
      return std::abs(parameter_);
  }
  return kInf;
}

std::string PairFunction::name() const {
  switch (kind_) {
    case Kind::sine:
      return "kuramoto";
    case Kind::cosine:
      return "cosine";
    case Kind::difference:
      return "linear_attraction";
    case Kind::tanh:
      return "tanh";
    case Kind::constant:
      return fmt::format("constant:{}", parameter_);
  }
  return "unknown";
}

PairFunction PairFunction::parse(std::string_view name) {
  const auto tokens = detail::split_name(name);
  std::size_t pos = 0;
  PairFunction f = detail::consume_pair(tokens, pos, name);
  if (pos != tokens.size())
    throw ConfigError(fmt::format("trailing tokens in pair function '{}'", name));
  return f;
}

WeightDynamics WeightDynamics::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant weight rate must be finite");
  return {Kind::constant, c, PairFunction::constant(0.0)};
}

WeightDynamics WeightDynamics::linear(double a, PairFunction g) {
  if (!(a > 0.0)) throw DomainError(fmt::format("linear decay needs a > 0, got {}", a));
  return {Kind::linear, a, g};
}

WeightDynamics WeightDynamics::saturating(PairFunction g) {
  return {Kind::saturating, 0.0, g};
}

double WeightDynamics::operator()(double w, std::span<const double> phi,
                                  std::span<const double> psi) const noexcept {
  switch (kind_) {
    case Kind::constant:
      return rate_;
    case Kind::linear:
      return -rate_ * w + forcing_(phi, psi);
    case Kind::saturating:
      return w * (1.0 - w) * forcing_(phi, psi);
  }
  return 0.0;
}

double WeightDynamics::lipschitz() const noexcept {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::linear:
      return std::max(rate_, forcing_.lipschitz());
    case Kind::saturating:
      return std::max(forcing_.sup_bound(), 0.25 * forcing_.lipschitz());
  }
  return kInf;
}

double WeightDynamics::weight_bound(double initial_bound,
                                    double horizon) const noexcept {
  switch (kind_) {
    case Kind::constant:
      return initial_bound + std::abs(rate_) * horizon;
    case Kind::linear:
      return std::max(initial_bound, forcing_.sup_bound() / rate_);
    case Kind::saturating:
      // [0, 1] is invariant; outside it the logistic factor may blow up.
      return initial_bound <= 1.0 ? 1.0 : kInf;
  }
  return kInf;
}

std::string WeightDynamics::name() const {
  switch (kind_) {
    case Kind::constant:
      return rate_ == 0.0 ? "zero" : fmt::format("constant:{}", rate_);
    case Kind::linear:
      return fmt::format("linear:{}:{}", rate_, forcing_.name());
    case Kind::saturating:
      return fmt::format("saturating:{}", forcing_.name());
  }
  return "unknown";
}

WeightDynamics WeightDynamics::parse(std::string_view name) {
  const auto tokens = detail::split_name(name);
  std::size_t pos = 0;
  WeightDynamics f = detail::consume_weight(tokens, pos, name);
  if (pos != tokens.size())
    throw ConfigError(fmt::format("trailing tokens in weight dynamics '{}'", name));
  return f;
}

namespace detail {

std::vector<std::string> split_name(std::string_view name) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = name.find(':', start);
    tokens.emplace_back(name.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  return tokens;
}

double parse_number(const std::string& token, std::string_view context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used == token.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("'{}' is not a number in '{}'", token, context));
}

PairFunction consume_pair(const std::vector<std::string>& tokens,
                          std::size_t& pos, std::string_view context) {
  if (pos >= tokens.size())
    throw ConfigError(fmt::format("missing pair function in '{}'", context));
  const std::string& head = tokens[pos++];
  if (head == "kuramoto" || head == "sin") return PairFunction::kuramoto();
  if (head == "cosine" || head == "cos") return PairFunction::cosine();
  if (head == "linear_attraction" || head == "linear")
    return PairFunction::linear_attraction();
  if (head == "tanh") return PairFunction::tanh();
  if (head == "zero") return PairFunction::constant(0.0);
  if (head == "constant") {
    if (pos >= tokens.size())
      throw ConfigError(fmt::format("constant needs a value in '{}'", context));
    return PairFunction::constant(parse_number(tokens[pos++], context));
  }
  throw ConfigError(fmt::format("unknown pair function '{}' in '{}'", head, context));
}

WeightDynamics consume_weight(const std::vector<std::string>& tokens,
                              std::size_t& pos, std::string_view context) {
  if (pos >= tokens.size())
    throw ConfigError(fmt::format("missing weight dynamics in '{}'", context));
  const std::string& head = tokens[pos++];
  if (head == "zero") return WeightDynamics::constant(0.0);
  if (head == "constant") {
    if (pos >= tokens.size())
      throw ConfigError(fmt::format("constant needs a value in '{}'", context));
    return WeightDynamics::constant(parse_number(tokens[pos++], context));
  }
  if (head == "linear") {
    if (pos >= tokens.size())
      throw ConfigError(fmt::format("linear needs a rate in '{}'", context));
    const double a = parse_number(tokens[pos++], context);
    if (!(a > 0.0))
      throw ConfigError(fmt::format("linear rate must be > 0 in '{}'", context));
    return WeightDynamics::linear(a, consume_pair(tokens, pos, context));
  }
  if (head == "saturating")
    return WeightDynamics::saturating(consume_pair(tokens, pos, context));
  throw ConfigError(fmt::format("unknown weight dynamics '{}' in '{}'", head, context));
}

}  // namespace detail

}  // namespace coevolve
