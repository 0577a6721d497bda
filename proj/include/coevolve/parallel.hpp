#pragma once

#include <cstddef>
#include <functional>

namespace coevolve {

/// Worker count: hardware concurrency, capped by COEVOLVE_THREADS when set.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on contiguous index ranges, one per worker.
/// Results must not depend on scheduling: each index owns its outputs. If
/// bodies throw, the exception of the lowest failing range is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace coevolve
