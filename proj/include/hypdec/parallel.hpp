#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hypdec {

// Worker cap: HYPDEC_THREADS env var, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("HYPDEC_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, n). Work is handed out through an atomic index;
// each index is processed exactly once, so results written to slot i are
// deterministic regardless of scheduling.
namespace detail {
inline thread_local bool inside_parallel = false;
}

inline void parallel_for(int n, const std::function<void(int)>& fn,
                         int max_workers = 0) {
  int workers = worker_count();
  if (max_workers > 0 && max_workers < workers) workers = max_workers;
  // nested regions run serially on the calling worker
  if (workers <= 1 || n <= 1 || detail::inside_parallel) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto body = [&] {
    detail::inside_parallel = true;
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
    detail::inside_parallel = false;
  };
  std::vector<std::thread> pool;
  int spawn = std::min(workers, n) - 1;
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

}  // namespace hypdec
