#pragma once

// Deterministic block-parallel loops: work is cut into fixed-size blocks,
// each block's result lands in its own slot, and callers combine slots in
// block order, so output does not depend on the number of threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace balayage {

inline std::size_t& thread_setting() {
  static std::size_t threads = 1;
  return threads;
}

/// 0 selects the hardware concurrency.
inline void set_threads(std::size_t n) {
  thread_setting() = n == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : n;
}

inline std::size_t threads() { return thread_setting(); }

inline constexpr std::size_t kBlockSize = 4096;

/// Calls fn(begin, end, block) for consecutive blocks covering [0, n).
template <class Fn>
void for_each_block(std::size_t n, Fn&& fn, std::size_t block = kBlockSize) {
  const std::size_t blocks = (n + block - 1) / block;
  const std::size_t workers = std::min(threads(), blocks);
  auto run = [&](std::size_t b) { fn(b * block, std::min(n, (b + 1) * block), b); };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
        try {
          run(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = blocks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace balayage
