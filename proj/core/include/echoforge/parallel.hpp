#pragma once

#include <cstddef>
#include <functional>

namespace echoforge {

// Worker count used when a caller passes 0: ECHOFORGE_THREADS if set and
// valid, otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t default_thread_count();

// Runs body(begin, end, chunk) for the chunks [k*chunk_size, min((k+1)*chunk_size, n)).
// Chunk boundaries depend only on n and chunk_size, never on the thread count,
// so callers that store per-chunk partial results and reduce them in chunk
// order get bit-identical output for any `threads`.
// The first exception thrown by a chunk is rethrown after all workers join.
void parallel_chunks(std::size_t n, std::size_t chunk_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

}  // namespace echoforge
