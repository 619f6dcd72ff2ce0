/// @file reduce.hpp
/// @brief Deterministic reductions and a small fixed-partition parallel loop.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

namespace h2kit {

/// Pairwise (tree-order) summation. The summation tree depends only on the
/// input length, so the result is reproducible run to run.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 64;
  if (v.size() <= kLeaf) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Thread count from an explicit request, else H2KIT_THREADS, else 1.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("H2KIT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

/// Calls body(begin, end) on contiguous chunks of [0, count). Each index is
/// visited exactly once; the chunking never affects per-index results.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    body(std::size_t{0}, count);
    return;
  }
  const std::size_t nchunks = std::min<std::size_t>(threads, count);
  std::vector<std::jthread> pool;
  pool.reserve(nchunks - 1);
  const std::size_t step = (count + nchunks - 1) / nchunks;
  for (std::size_t c = 1; c < nchunks; ++c) {
    const std::size_t b = c * step, e = std::min(count, b + step);
    if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::size_t{0}, std::min(count, step));
}

} // namespace h2kit
