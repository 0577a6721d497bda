#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "coevolve/rng.hpp"

namespace coevolve {

/// Scalar profile of the label x used for initial data and law parameters.
class Profile {
 public:
  enum class Kind { polynomial, sine, constant };

  /// sum_i c_i x^i
  static Profile polynomial(std::vector<double> coefficients);
  /// amplitude * sin(2 pi frequency x)
  static Profile sine(double amplitude, double frequency);
  static Profile constant(double c);

  /// `poly:c0,c1,...`, `sin:<amplitude>:<frequency>`, `constant:<c>`.
  static Profile parse(std::string_view name);

  double operator()(double x) const noexcept;
  Kind kind() const noexcept { return kind_; }
  std::string name() const;

 private:
  Profile(Kind kind, std::vector<double> parameters)
      : kind_(kind), parameters_(std::move(parameters)) {}
  Kind kind_;
  std::vector<double> parameters_;
};

/// Fiber family x -> mu0^x of scalar initial laws.
class InitialLaw {
 public:
  enum class Family { gaussian, uniform, dirac };

  static InitialLaw gaussian(Profile mean, Profile sd);
  static InitialLaw uniform(Profile lower, Profile upper);
  static InitialLaw dirac(Profile value);

  Family family() const noexcept { return family_; }
  const Profile& first() const noexcept { return first_; }
  const Profile& second() const noexcept { return second_; }
  double mean(double x) const noexcept;
  std::string name() const;

 private:
  InitialLaw(Family family, Profile first, Profile second)
      : family_(family), first_(std::move(first)), second_(std::move(second)) {}
  Family family_;
  Profile first_;
  Profile second_;
};

/// One mixture component: the fiber law at a quadrature node.
struct LawComponent {
  double weight;
  double first;   // mean, lower end or point
  double second;  // sd or upper end; unused for dirac
};

/// Block average n int_{I_k} mu0^x dx as a finite mixture.
class BlockLaw {
 public:
  BlockLaw(InitialLaw::Family family, std::vector<LawComponent> components);

  InitialLaw::Family family() const noexcept { return family_; }
  const std::vector<LawComponent>& components() const noexcept { return components_; }
  double total_mass() const noexcept;
  double mean() const noexcept;
  double variance() const noexcept;
  double sample(CounterRng& rng) const;

 private:
  InitialLaw::Family family_;
  std::vector<LawComponent> components_;
};

/// Block laws over the uniform n-partition, 16-point Gauss in x per block.
std::vector<BlockLaw> block_initial_measures(const InitialLaw& law, std::size_t n);

}  // namespace coevolve
