#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace lodbs {

/// Run fn(i) for i in [0, n). Work items must be independent; results should
/// go into preallocated slots so the output order is deterministic no matter
/// how items are scheduled.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace lodbs
