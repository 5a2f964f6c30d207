#pragma once
#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace clt {

// chunked parallel loop; chunk boundaries depend only on (threads, n), so any
// per-index work that is independent produces scheduling-independent results
template <class F>
void parallelFor(int threads, std::size_t n, F&& body) {
  if (n == 0) return;
  int t = std::max(1, threads);
  if (t == 1 || n == 1) {
    for (std::size_t i = 0; i < n; i++) body(i);
    return;
  }
  std::size_t chunk = (n + (std::size_t)t - 1) / (std::size_t)t;
  std::vector<std::thread> pool;
  for (int w = 0; w < t; w++) {
    std::size_t lo = (std::size_t)w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; i++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace clt
