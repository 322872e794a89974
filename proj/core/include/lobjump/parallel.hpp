#pragma once

#include <cstddef>
#include <functional>

namespace lobjump {

// Worker count for parallel loops. LOBJUMP_THREADS overrides the
// hardware default; values < 1 are treated as 1.
int default_thread_count();

// Runs fn(i) for i in [0, count) on default_thread_count() threads.
// Indices are handed out atomically; the caller is responsible for
// making iterations independent (all our loops seed per-index RNGs
// with derive_seed, so results do not depend on the thread count).
// Exceptions thrown by fn are collected and the first one rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace lobjump
