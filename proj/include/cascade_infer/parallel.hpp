#pragma once

#include <cstddef>
#include <functional>

namespace cascade_infer {

/// Worker count: CASCADE_INFER_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Splits [0, count) into at most `threads` contiguous chunks and calls
/// body(chunk_index, begin, end) for each, concurrently. threads == 0 means
/// default_thread_count(). Exceptions from any chunk are rethrown (first one
/// wins) after all workers have joined.
void parallel_chunks(std::size_t count, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Number of chunks parallel_chunks will use for the given inputs.
std::size_t chunk_count(std::size_t count, std::size_t threads);

}  // namespace cascade_infer
