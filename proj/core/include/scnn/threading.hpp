#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace scnn {

/// Global worker count for the kernels that parallelize (spmm, spmm_transpose,
/// dense matmul, per-row gradient accumulation). Default is 1; the CLI raises
/// it. Results are bit-identical for any thread count because work is split
/// into contiguous output ranges and no sum is reassociated across threads.
void set_num_threads(int n);
int num_threads();

/// Runs fn(begin, end) over a partition of [0, n) into contiguous chunks, one
/// per worker. Falls back to a single inline call when the range is small or
/// only one thread is configured.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers = num_threads();
  if (workers <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, n);
  const std::size_t base = n / chunks;
  const std::size_t rem = n % chunks;
  std::vector<std::thread> pool;
  pool.reserve(chunks - 1);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = begin + base + (c < rem ? 1 : 0);
    if (c == chunks - 1) {
      fn(begin, end);
    } else {
      pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace scnn
