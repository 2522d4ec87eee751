#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace proxstair {

/// Worker count: PROXSTAIR_THREADS caps the number of threads, default is
/// hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PROXSTAIR_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) return static_cast<unsigned>(cap);
  }
  return hw;
}

/// Runs fn(begin, end) over a partition of [0, n). Chunks write disjoint
/// state, so the result is independent of the schedule.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  unsigned workers = worker_count();
  if (n < 1024 || workers == 1) {
    fn(0, n);
    return;
  }
  std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

}  // namespace proxstair
