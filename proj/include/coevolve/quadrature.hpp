#pragma once

#include <cstddef>
#include <vector>

namespace coevolve {

struct QuadratureRule {
  std::vector<double> nodes;    // ascending, in [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule mapped to [0, 1]; supported orders are 8 and 16.
const QuadratureRule& gauss_legendre_unit(std::size_t order);

}  // namespace coevolve
