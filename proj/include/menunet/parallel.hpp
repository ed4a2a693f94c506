#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace menunet {

/// Work is split into fixed-size blocks whose partial results are combined by
/// tree_reduce; the block layout never depends on the thread count, so results
/// are bit-identical for any number of workers.
inline constexpr std::size_t kBlockSize = 256;

inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

inline std::size_t block_count(std::size_t n, std::size_t block = kBlockSize) {
  return (n + block - 1) / block;
}

/// Calls fn(b) for every block b in [0, blocks). Worker t handles blocks
/// t, t + threads, ... The first exception thrown by any worker is rethrown.
template <class Fn>
void for_each_block(std::size_t blocks, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t b = t; b < blocks; b += threads) fn(b);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Pairwise reduction: level by level, element 2i absorbs element 2i+1.
template <class T, class Combine>
T tree_reduce(std::vector<T> parts, Combine combine) {
  if (parts.empty()) return T{};
  std::size_t n = parts.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) {
      parts[i] = combine(std::move(parts[2 * i]), std::move(parts[2 * i + 1]));
    }
    if (n % 2 == 1) parts[n / 2] = std::move(parts[n - 1]);
    n = half;
  }
  return std::move(parts[0]);
}

}  // namespace menunet
