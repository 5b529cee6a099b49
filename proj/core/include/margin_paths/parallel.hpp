#pragma once

#include <cstddef>
#include <functional>

namespace mpaths {

/// Worker count: hardware concurrency, capped by MARGIN_PATHS_THREADS when set.
std::size_t worker_count();

/// Calls body(i) for i in [0, n). Each index writes only its own output slot, so
/// results do not depend on scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mpaths
