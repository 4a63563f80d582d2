#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace frob {

inline std::atomic<int>& worker_thread_setting() {
  static std::atomic<int> n{0};  // 0 = use hardware parallelism
  return n;
}

inline void set_worker_threads(int n) { worker_thread_setting() = n; }

inline int worker_threads() {
  int n = worker_thread_setting();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

// Independent iterations on the worker pool; rethrows the first failure.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
  int nt = std::min(worker_threads(), count);
  if (nt <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> bad{false};
  std::exception_ptr first;
  std::mutex emu;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next++) < count;) {
        if (bad) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(emu);
          if (!first) first = std::current_exception();
          bad = true;
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace frob
