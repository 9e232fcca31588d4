#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace pacauction {

// Number of workers used by the Monte Carlo loops. Results never depend on
// it: work is keyed by index and reductions are integer sums or index-ordered.
inline unsigned worker_count(std::uint64_t work_items) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (work_items < 4096) return 1;
  return static_cast<unsigned>(std::min<std::uint64_t>(hw, work_items / 1024));
}

// Calls body(i) for i in [0, n) across worker threads, in contiguous blocks.
template <class Body>
void parallel_for_index(std::uint64_t n, Body&& body) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * block;
    const std::uint64_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &body] {
      for (std::uint64_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Number of indices in [0, n) for which pred(i) holds.
template <class Pred>
std::uint64_t parallel_count(std::uint64_t n, Pred&& pred) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n; ++i) hits += pred(i) ? 1 : 0;
    return hits;
  }
  std::vector<std::uint64_t> partial(workers, 0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = w * block;
    const std::uint64_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([begin, end, w, &partial, &pred] {
      std::uint64_t hits = 0;
      for (std::uint64_t i = begin; i < end; ++i) hits += pred(i) ? 1 : 0;
      partial[w] = hits;
    });
  }
  for (auto& t : pool) t.join();
  std::uint64_t hits = 0;
  for (auto h : partial) hits += h;
  return hits;
}

}  // namespace pacauction
