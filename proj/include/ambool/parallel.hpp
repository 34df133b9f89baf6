#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ambool {

/// Worker count: AMBOOL_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("AMBOOL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

/// Runs `body(begin, end)` over contiguous chunks of [0, n). Chunks are
/// independent; callers write results into per-index slots so the outcome
/// does not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t, size_t)>& body, size_t min_chunk = 256) {
  const size_t workers = std::min<size_t>(size_t(worker_count()), (n + min_chunk - 1) / std::max<size_t>(min_chunk, 1));
  if (workers <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    const size_t begin = w * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace ambool
