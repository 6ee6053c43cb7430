#pragma once

#include <cstddef>
#include <functional>

namespace llq {

/// Worker count, capped by the LLQ_THREADS environment variable (default:
/// hardware concurrency).
unsigned worker_threads();

/// Fork-join loop over [0, n). Each index is visited exactly once; the call
/// returns after all workers joined. Exceptions from the body are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace llq
