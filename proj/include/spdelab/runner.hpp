#pragma once
// Path-indexed worker pool. Each index writes only its own result slot and
// reductions happen afterwards in index order, so the outcome is identical
// for any worker count.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "spdelab/common.hpp"

namespace spdelab {

inline void parallel_paths(int n, int workers, const std::function<void(int)>& body) {
  SPDELAB_REQUIRE(n >= 0, "parallel_paths: negative count");
  SPDELAB_REQUIRE(workers >= 1, "parallel_paths: need at least one worker");
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace spdelab
