#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coevolve {

/// Scalar pair function R^d x R^d -> R, used both as the coupling C and as
/// the weight forcing g. Catalog entries act on the first coordinate; for
/// d > 1 the scalar is broadcast by the integrators.
class PairFunction {
 public:
  enum class Kind { sine, cosine, difference, tanh, constant };

  /// sin(psi - phi)
  static PairFunction kuramoto();
  /// cos(psi - phi)
  static PairFunction cosine();
  /// psi - phi
  static PairFunction linear_attraction();
  /// tanh(psi - phi)
  static PairFunction tanh();
  static PairFunction constant(double c);

  /// Accepts `kuramoto`/`sin`, `cosine`/`cos`, `linear_attraction`/`linear`,
  /// `tanh`, `constant:<c>` and `zero`.
  static PairFunction parse(std::string_view name);

  double operator()(std::span<const double> phi,
                    std::span<const double> psi) const noexcept;

  /// L with |C(p,q) - C(p',q')| <= L (|p - p'| + |q - q'|).
  double lipschitz() const noexcept;
  /// sup |C|; infinity for unbounded entries.
  double sup_bound() const noexcept;
  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return parameter_; }
  bool is_zero() const noexcept {
    return kind_ == Kind::constant && parameter_ == 0.0;
  }
  std::string name() const;

 private:
  PairFunction(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Right-hand side F(w, phi, psi) of the weight ODE.
class WeightDynamics {
 public:
  enum class Kind { constant, linear, saturating };

  /// F = c (c = 0 freezes the weights).
  static WeightDynamics constant(double c);
  /// F = -a w + g(phi, psi), a > 0.
  static WeightDynamics linear(double a, PairFunction g);
  /// F = w (1 - w) g(phi, psi); Lipschitz on w in [0, 1] only.
  static WeightDynamics saturating(PairFunction g);

  /// `zero`, `constant:<c>`, `linear:<a>:<g>`, `saturating:<g>`.
  static WeightDynamics parse(std::string_view name);

  double operator()(double w, std::span<const double> phi,
                    std::span<const double> psi) const noexcept;

  /// L_F in the sum convention |dw| + |dphi| + |dpsi|.
  double lipschitz() const noexcept;
  /// sup_{t <= horizon} |w(t)| given |w(0)| <= initial_bound.
  double weight_bound(double initial_bound, double horizon) const noexcept;

  Kind kind() const noexcept { return kind_; }
  double rate() const noexcept { return rate_; }
  const PairFunction& forcing() const noexcept { return forcing_; }
  bool is_zero() const noexcept {
    return kind_ == Kind::constant && rate_ == 0.0;
  }
  std::string name() const;

 private:
  WeightDynamics(Kind kind, double rate, PairFunction forcing)
      : kind_(kind), rate_(rate), forcing_(forcing) {}
  Kind kind_;
  double rate_;
  PairFunction forcing_;
};

namespace detail {

/// Colon-separated catalog names; entries such as `constant:<c>` span two
/// tokens, so composite names are parsed by consuming from the front.
std::vector<std::string> split_name(std::string_view name);
double parse_number(const std::string& token, std::string_view context);
PairFunction consume_pair(const std::vector<std::string>& tokens,
                          std::size_t& pos, std::string_view context);
WeightDynamics consume_weight(const std::vector<std::string>& tokens,
                              std::size_t& pos, std::string_view context);

}  // namespace detail

}  // namespace coevolve
