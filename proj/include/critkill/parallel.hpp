#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace critkill {

inline constexpr long kBlockSize = 4096;

// Runs body(block_index, begin, end) over the index range [0, n) split into
// fixed-size blocks. Workers steal whole blocks; each block must write only
// its own output slot, and callers merge slots in block order afterwards, so
// results are independent of the worker count.
template <class Body>
void parallel_blocks(long n, int workers, Body&& body) {
  if (n <= 0) return;
  long nb = (n + kBlockSize - 1) / kBlockSize;
  if (workers <= 1 || nb <= 1) {
    for (long b = 0; b < nb; ++b)
      body(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    return;
  }
  std::atomic<long> next{0};
  auto run = [&] {
    for (;;) {
      long b = next.fetch_add(1);
      if (b >= nb) return;
      body(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    }
  };
  int nw = static_cast<int>(std::min<long>(workers, nb));
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int i = 0; i < nw; ++i) pool.emplace_back(run);
  for (auto& th : pool) th.join();
}

}  // namespace critkill
