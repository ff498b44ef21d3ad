#pragma once

#include <cstddef>
#include <functional>

namespace nne {

/// Worker count used by parallel_for when none is given; defaults to the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(k) for k in [0, n). Results must be written by index so the
/// outcome does not depend on scheduling. Calls made from inside a worker run
/// serially. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace nne
