#pragma once

#include <cstddef>
#include <functional>

namespace pspin {

/// Process-wide worker count used by contractions and experiment runners.
/// Results never depend on this value; only wall time does.
void set_num_threads(int threads);
int num_threads();

/// Calls body(begin, end) on disjoint chunks covering [0, n). Each index is
/// handled by exactly one call, so per-index work stays order-independent.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1);

}  // namespace pspin
