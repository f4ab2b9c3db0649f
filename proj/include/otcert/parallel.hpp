#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace otcert {

/// Process-wide cap on worker threads (CLI --threads). 0 = hardware default.
inline int& thread_limit() {
  static int limit = 0;
  return limit;
}

inline int effective_threads() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int lim = thread_limit();
  return lim > 0 ? std::min(lim, hw) : hw;
}

/// Chunked parallel loop over [0, n). `body(begin, end, chunk_index)` runs on
/// disjoint index ranges; chunk indices are dense so callers can reduce
/// deterministically by merging per-chunk results in order.
inline void parallel_chunks(
    std::int64_t n,
    const std::function<void(std::int64_t, std::int64_t, int)>& body,
    int* out_chunks = nullptr) {
  int nt = effective_threads();
  if (n < 1024 || nt <= 1) {
    body(0, n, 0);
    if (out_chunks) *out_chunks = 1;
    return;
  }
  int chunks = std::min<std::int64_t>(nt, std::max<std::int64_t>(1, n / 512));
  std::int64_t step = (n + chunks - 1) / chunks;
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (int k = 0; k < chunks; ++k) {
    std::int64_t b = k * step, e = std::min<std::int64_t>(n, b + step);
    if (b >= e) break;
    pool.emplace_back([&body, b, e, k] { body(b, e, k); });
  }
  if (out_chunks) *out_chunks = int(pool.size());
  for (auto& t : pool) t.join();
}

}  // namespace otcert
