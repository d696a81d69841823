#pragma once

#include <cstdint>
#include <functional>

namespace entlab {

// Worker count: `requested` if positive, otherwise hardware concurrency,
// always capped by the ENTROPY_LAB_THREADS environment variable when set.
int effective_threads(int requested = 0);

// Runs fn(begin, end) over contiguous blocks of [0, n) on the given number
// of workers. Callers must make fn's writes disjoint per block; results must
// not depend on the block decomposition.
void parallel_blocks(std::uint64_t n, int threads,
                     const std::function<void(std::uint64_t, std::uint64_t)>& fn);

}  // namespace entlab
