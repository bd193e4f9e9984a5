#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace invp {

/// Runs `task(i)` for every i in [0, count) on up to `workers` threads.
///
/// Tasks must write only to storage owned by index i; callers reduce the
/// per-index results in index order afterwards, so output never depends on
/// the worker count. If several tasks throw, the exception of the lowest
/// index is rethrown.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Sums `values` by recursive halving. The association order depends only
/// on the length, which keeps reductions reproducible.
template <class Range>
double pairwise_sum(const Range& values, std::size_t begin, std::size_t end) {
  if (end - begin <= 8) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += values[i];
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(values, begin, mid) + pairwise_sum(values, mid, end);
}

template <class Range>
double pairwise_sum(const Range& values) {
  return pairwise_sum(values, 0, values.size());
}

}  // namespace invp
