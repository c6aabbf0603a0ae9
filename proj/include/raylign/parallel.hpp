#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace raylign {

/// Runs fn(i) for i in [0, n) across up to `jobs` threads (0 = hardware
/// concurrency). Work is split into contiguous chunks; callers that need
/// deterministic output write into index-i slots and reduce sequentially.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t threads = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, hw);
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace raylign
