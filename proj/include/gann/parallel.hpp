#pragma once

#include <cstddef>
#include <functional>

namespace gann {

/// Global worker count for construction-time parallelism. Searches stay
/// single-threaded regardless.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [begin, end) across the configured workers.
/// Each index must only write to its own slot; under that contract the
/// result is identical for any thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace gann
