#include "coevolve/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace coevolve {

double dobrushin_bound(double l_k, double l_w, double d0, double t) {
  return std::numbers::sqrt2 * std::max(1.0, l_w) * d0 * 2.0 * std::exp(2.0 * l_k * t);
}

double dobrushin_bound_nonlip(double l_k, double d_i0, double w_l1_diff, double t) {
  const double growth = std::exp(2.0 * l_k * t);
  return 2.0 * d_i0 * growth + 0.5 * w_l1_diff * (growth - 1.0);
}

}  // namespace coevolve
