#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace polygreen {

/// Worker cap: POLYGREEN_THREADS if set, else hardware concurrency.
inline int max_threads() {
  if (const char* env = std::getenv("POLYGREEN_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Static-chunk parallel loop. Each index is processed exactly once; callers
/// write results to per-index slots so the outcome is deterministic.
template <typename F>
void parallel_for(std::size_t count, F&& body) {
  int nt = std::min<std::size_t>(max_threads(), count);
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace polygreen
