#pragma once

// Deterministic, splittable randomness.
//
// All stochastic routines in the library draw from SplitRng, a splitmix64
// stream whose key is derived by hashing a root seed with integer tags
// (derive_seed). Streams with distinct derivation paths are statistically
// independent, so parallel Monte Carlo trials replay bit-identically no
// matter how they are scheduled across threads.

#include <cassert>
#include <cstdint>
#include <vector>

namespace splitclust {

/// splitmix64 finalizer (Steele, Lea, Flood 2014). Bijective on u64.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Derives a child stream key from a parent key and an integer tag.
/// Frozen: trial replayability depends on this never changing.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  return mix64(parent ^ (0x9e3779b97f4a7c15ULL * (tag + 1) + 0x7f4a7c15ULL));
}

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Bernoulli draw; exact at p <= 0 (never) and p >= 1 (always).
  bool bernoulli(double p) noexcept { return next_double() < p; }

  /// Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    assert(bound > 0);
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by a SplitRng.
template <typename T>
void shuffle(std::vector<T>& items, SplitRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace splitclust
