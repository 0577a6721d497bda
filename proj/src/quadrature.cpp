#include "coevolve/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "coevolve/error.hpp"

namespace coevolve {

namespace {

template <std::size_t Order>
QuadratureRule build_rule() {
  using Rule = boost::math::quadrature::gauss<double, Order>;
  static_assert(Order % 2 == 0);
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  QuadratureRule rule;
  // Boost stores the non-negative half; mirror it into ascending order.
  for (std::size_t i = abscissa.size(); i-- > 0;) {
    rule.nodes.push_back(0.5 * (1.0 - abscissa[i]));
    rule.weights.push_back(0.5 * weights[i]);
  }
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    rule.nodes.push_back(0.5 * (1.0 + abscissa[i]));
    rule.weights.push_back(0.5 * weights[i]);
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre_unit(std::size_t order) {
  static const QuadratureRule rule8 = build_rule<8>();
  static const QuadratureRule rule16 = build_rule<16>();
  if (order == 8) return rule8;
  if (order == 16) return rule16;
  throw DomainError("only 8- and 16-point Gauss-Legendre rules are provided");
}

}  // namespace coevolve
