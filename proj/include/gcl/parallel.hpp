// Deterministic cell-parallel loop: entries are written once each, never
// reduced across threads, so results are bitwise independent of thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "gcl/core.hpp"

namespace gcl {

inline int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

template <class Fn>
void parallel_for(index_t n, int threads, Fn&& body) {
  if (threads <= 1 || n < 4096) {
    for (index_t i = 0; i < n; ++i) body(i);
    return;
  }
  const index_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const index_t lo = t * chunk;
    const index_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (index_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gcl
