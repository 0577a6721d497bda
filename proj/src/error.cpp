#include "coevolve/error.hpp"

#include <fmt/format.h>

namespace coevolve {

std::string describe_state(const double* values, std::size_t count,
                           std::size_t limit) {
  std::string out = "[";
  for (std::size_t i = 0; i < count && i < limit; ++i) {
    if (i) out += ", ";
    out += fmt::format("{:.6g}", values[i]);
  }
  if (count > limit) out += fmt::format(", ... ({} values)", count);
  out += "]";
  return out;
}

}  // namespace coevolve
