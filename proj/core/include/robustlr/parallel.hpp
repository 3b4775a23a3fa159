#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace robustlr {

/// Number of work chunks used by parallel_chunks; fixed so that per-chunk
/// partial results (and therefore floating-point reduction order) do not
/// depend on the executing thread count.
inline constexpr std::size_t kParallelChunks = 128;

/// Runs `body(first, last, chunk_index)` over a partition of [0, n).
/// The partition into at most kParallelChunks contiguous chunks depends only
/// on n; `threads` workers pull chunks from a shared queue. Callers that
/// accumulate per-chunk partials and merge them in chunk-index order obtain
/// bit-identical results for every thread count.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t nchunks = std::min(n, kParallelChunks);
  const std::size_t base = n / nchunks, rem = n % nchunks;
  const auto chunk_bounds = [&](std::size_t c) {
    const std::size_t first = c * base + std::min(c, rem);
    return std::pair{first, first + base + (c < rem ? 1 : 0)};
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads < 1 ? 1 : threads), nchunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const auto [first, last] = chunk_bounds(c);
      body(first, last, c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t c = next.fetch_add(1); c < nchunks; c = next.fetch_add(1)) {
        const auto [first, last] = chunk_bounds(c);
        body(first, last, c);
      }
    });
  }
  for (auto& t : pool) t.join();
}

/// Thread count for the CLI: the ROBUSTLR_THREADS environment variable
/// overrides `requested`; requested <= 0 falls back to the hardware count.
int resolve_thread_count(int requested);

}  // namespace robustlr
