/// @file rng.hpp
/// @brief Counter-based 64-bit generator used for every random draw in h2kit.
///
/// Output n of stream (key) is splitmix64(key + n * golden_gamma), i.e. the
/// SplitMix64 finalizer applied to a Weyl sequence. A stream is fully
/// described by (key, counter), so independent streams are obtained by
/// deriving keys from (seed, stream id) with `derive_key`.
#pragma once

#include <cstdint>
#include <limits>

namespace h2kit {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64_mix(splitmix64_mix(seed ^ 0x6a09e667f3bcc909ULL) + stream);
}

class CounterRng {
public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return CounterRng(derive_key(seed, stream_id));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64_mix(key_ + (counter_++) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (rejection on the top zone).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

} // namespace h2kit
