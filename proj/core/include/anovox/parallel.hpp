#pragma once

#include <cstddef>
#include <functional>

namespace anovox {

/// Resolves a thread-count request: 0 means hardware concurrency, anything
/// else is clamped to at least 1.
int resolve_threads(int requested);

/// Runs fn(begin, end) over contiguous chunks of [begin, end) on up to
/// `threads` workers. With threads <= 1 this is a plain call. Exceptions
/// thrown by workers are rethrown on the calling thread.
void parallel_for_chunks(std::size_t begin, std::size_t end, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace anovox
