#pragma once

#include <cstddef>
#include <functional>

namespace lzi {

/// Worker count: LZI_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_cap();

/// Runs body(0..count-1) on up to thread_cap() threads. Each index runs
/// exactly once; if any body throws, the exception of the lowest failing
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lzi
