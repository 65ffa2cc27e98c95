#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace hjbi {

/// Number of worker threads used by element loops. 0 means "use HJBI_THREADS or 1".
void set_thread_count(int threads);
int thread_count();

/// Static block partition of [0, n) over the configured workers. Each index is
/// visited exactly once; callers write into per-index slots so the result does
/// not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, thread_count()));
  if (workers == 1 || n < 2 * workers) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

/// Pairwise summation, fixed association order.
double pairwise_sum(std::span<const double> values);

}  // namespace hjbi
