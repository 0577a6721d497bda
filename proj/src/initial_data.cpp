#include "coevolve/initial_data.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "coevolve/catalog.hpp"
#include "coevolve/error.hpp"
#include "coevolve/quadrature.hpp"

namespace coevolve {

Profile Profile::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw DomainError("polynomial profile needs coefficients");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw DomainError("polynomial coefficient not finite");
  return {Kind::polynomial, std::move(coefficients)};
}

Profile Profile::sine(double amplitude, double frequency) {
  if (!std::isfinite(amplitude) || !std::isfinite(frequency))
    throw DomainError("sine profile parameters must be finite");
  return {Kind::sine, {amplitude, frequency}};
}

Profile Profile::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("constant profile must be finite");
  return {Kind::constant, {c}};
}

Profile Profile::parse(std::string_view name) {
  const auto tokens = detail::split_name(name);
  const std::string& head = tokens.front();
  if (head == "constant" && tokens.size() == 2)
    return constant(detail::parse_number(tokens[1], name));
  if (head == "sin" && tokens.size() == 3)
    return sine(detail::parse_number(tokens[1], name),
                detail::parse_number(tokens[2], name));
  if (head == "poly" && tokens.size() == 2) {
    std::vector<double> coefficients;
    std::size_t start = 0;
    const std::string& list = tokens[1];
    while (true) {
      const std::size_t comma = list.find(',', start);
      coefficients.push_back(
          detail::parse_number(list.substr(start, comma - start), name));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return polynomial(std::move(coefficients));
  }
  throw ConfigError(fmt::format(
      "unknown profile '{}' (expected poly:c0,c1,..., sin:<amp>:<freq> or "
      "constant:<c>)",
      name));
}

double Profile::operator()(double x) const noexcept {
  switch (kind_) {
    case Kind::polynomial: {
      double v = 0.0;
      for (auto it = parameters_.rbegin(); it != parameters_.rend(); ++it) v = v * x + *it;
      return v;
    }
    case Kind::sine:
      return parameters_[0] * std::sin(2.0 * std::numbers::pi * parameters_[1] * x);
    case Kind::constant:
      return parameters_[0];
  }
  return 0.0;
}

std::string Profile::name() const {
  switch (kind_) {
    case Kind::polynomial:
      return fmt::format("poly:{}", fmt::join(parameters_, ","));
    case Kind::sine:
      return fmt::format("sin:{}:{}", parameters_[0], parameters_[1]);
    case Kind::constant:
      return fmt::format("constant:{}", parameters_[0]);
  }
  return "unknown";
}

InitialLaw InitialLaw::gaussian(Profile mean, Profile sd) {
  return {Family::gaussian, std::move(mean), std::move(sd)};
}

InitialLaw InitialLaw::uniform(Profile lower, Profile upper) {
  return {Family::uniform, std::move(lower), std::move(upper)};
}

InitialLaw InitialLaw::dirac(Profile value) {
  return {Family::dirac, value, Profile::constant(0.0)};
}

double InitialLaw::mean(double x) const noexcept {
  if (family_ == Family::uniform) return 0.5 * (first_(x) + second_(x));
  return first_(x);
}

std::string InitialLaw::name() const {
  switch (family_) {
    case Family::gaussian:
      return fmt::format("gaussian(mean={}, sd={})", first_.name(), second_.name());
    case Family::uniform:
      return fmt::format("uniform({}, {})", first_.name(), second_.name());
    case Family::dirac:
      return fmt::format("dirac({})", first_.name());
  }
  return "unknown";
}

BlockLaw::BlockLaw(InitialLaw::Family family, std::vector<LawComponent> components)
    : family_(family), components_(std::move(components)) {
  if (components_.empty()) throw DomainError("block law needs components");
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.first) || !std::isfinite(c.second))
      throw ValidationError("block law component not finite or negative weight");
    if (family_ == InitialLaw::Family::gaussian && c.second < 0.0)
      throw ValidationError(fmt::format("negative standard deviation {}", c.second));
    if (family_ == InitialLaw::Family::uniform && c.second < c.first)
      throw ValidationError(
          fmt::format("uniform law with upper {} below lower {}", c.second, c.first));
  }
}

double BlockLaw::total_mass() const noexcept {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight;
  return m;
}

namespace {

double component_mean(InitialLaw::Family family, const LawComponent& c) {
  return family == InitialLaw::Family::uniform ? 0.5 * (c.first + c.second) : c.first;
}

double component_variance(InitialLaw::Family family, const LawComponent& c) {
  switch (family) {
    case InitialLaw::Family::gaussian:
      return c.second * c.second;
    case InitialLaw::Family::uniform:
      return (c.second - c.first) * (c.second - c.first) / 12.0;
    case InitialLaw::Family::dirac:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

double BlockLaw::mean() const noexcept {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * component_mean(family_, c);
  return m;
}

double BlockLaw::variance() const noexcept {
  double second = 0.0;
  for (const auto& c : components_) {
    const double mu = component_mean(family_, c);
    second += c.weight * (component_variance(family_, c) + mu * mu);
  }
  const double mu = mean();
  return std::max(0.0, second - mu * mu);
}

double BlockLaw::sample(CounterRng& rng) const {
  const double u = rng.uniform() * total_mass();
  const LawComponent* chosen = &components_.back();
  double cumulative = 0.0;
  for (const auto& c : components_) {
    cumulative += c.weight;
    if (u < cumulative) {
      chosen = &c;
      break;
    }
  }
  switch (family_) {
    case InitialLaw::Family::gaussian:
      return chosen->first + chosen->second * rng.normal();
    case InitialLaw::Family::uniform:
      return chosen->first + (chosen->second - chosen->first) * rng.uniform();
    case InitialLaw::Family::dirac:
      return chosen->first;
  }
  return chosen->first;
}

std::vector<BlockLaw> block_initial_measures(const InitialLaw& law, std::size_t n) {
  if (n == 0) throw DomainError("block_initial_measures needs n >= 1");
  const QuadratureRule& rule = gauss_legendre_unit(16);
  const double width = 1.0 / static_cast<double>(n);
  std::vector<BlockLaw> blocks;
  blocks.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<LawComponent> components;
    components.reserve(rule.nodes.size());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = (static_cast<double>(k) + rule.nodes[q]) * width;
      components.push_back({rule.weights[q], law.first()(x), law.second()(x)});
    }
    blocks.emplace_back(law.family(), std::move(components));
  }
  return blocks;
}

}  // namespace coevolve
