#include "entlab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace entlab {

int effective_threads(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("ENTROPY_LAB_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap > 0) n = std::min(n, cap);
    } catch (...) {
      // unparseable cap is ignored
    }
  }
  return std::max(1, n);
}

void parallel_blocks(std::uint64_t n, int threads,
                     const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
  if (n == 0) return;
  std::uint64_t workers = static_cast<std::uint64_t>(std::max(1, threads));
  workers = std::min<std::uint64_t>(workers, n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::uint64_t chunk = (n + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace entlab
