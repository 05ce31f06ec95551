#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hypermap {

// Resolves a thread-count request: 0 means "all hardware threads".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Runs fn(block) for block = 0..n_blocks-1 on `threads` workers.
// Blocks are claimed from an atomic counter; callers must write disjoint
// outputs per block so results do not depend on the schedule.
template <typename Fn>
void parallel_blocks(std::int64_t n_blocks, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (n_blocks <= 0) return;
  if (threads <= 1 || n_blocks == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(b);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int nw = static_cast<int>(std::min<std::int64_t>(threads, n_blocks));
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline constexpr std::int64_t kReduceBlock = 4096;

}  // namespace detail

// Chunked loop: fn(begin, end) over [0, n) in fixed-size chunks. Writes must
// be disjoint per chunk; the chunk decomposition is independent of the thread
// count, so any deterministic post-reduction is reproducible.
template <typename Fn>
void parallel_chunks(std::int64_t n, std::int64_t chunk, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (chunk <= 0) chunk = 1;
  std::int64_t n_blocks = (n + chunk - 1) / chunk;
  detail::parallel_blocks(n_blocks, threads, [&](std::int64_t b) {
    std::int64_t lo = b * chunk;
    std::int64_t hi = std::min(n, lo + chunk);
    fn(lo, hi);
  });
}

// Deterministic parallel sum of term(i) for i in [0, n): partial sums are
// accumulated per fixed-size block and combined in block order, so the result
// is bit-identical for any thread count.
template <typename Fn>
double parallel_sum(std::int64_t n, int threads, Fn&& term) {
  if (n <= 0) return 0.0;
  std::int64_t n_blocks = (n + detail::kReduceBlock - 1) / detail::kReduceBlock;
  std::vector<double> partial(static_cast<std::size_t>(n_blocks), 0.0);
  detail::parallel_blocks(n_blocks, threads, [&](std::int64_t b) {
    std::int64_t lo = b * detail::kReduceBlock;
    std::int64_t hi = std::min(n, lo + detail::kReduceBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace hypermap
