#pragma once

#include <cstddef>
#include <functional>

namespace domino {

// Worker count from DOMINO_THREADS (default 1, clamped to [1, 64]).
std::size_t thread_count();

// Runs body(chunk) for chunk in [0, chunks). Chunk boundaries are chosen by
// the caller, so any per-chunk partial results reduced in chunk order are
// identical regardless of how many threads execute them.
void parallel_for_chunks(std::size_t chunks,
                         const std::function<void(std::size_t)>& body);

}  // namespace domino
