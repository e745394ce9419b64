#pragma once

// Counter-based random streams.
//
// Every experiment is driven by a single 64-bit seed. Independent work items
// (trials, optimizer restarts, sampled models) get their own stream, keyed by
// (seed, stream id), so results never depend on evaluation order.

#include <cmath>
#include <cstdint>
#include <limits>

namespace randsub {

inline constexpr std::uint64_t kDefaultSeed = 20240601ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// SplitMix64 generator: the state is a counter, output is a hash of it.
// Satisfies UniformRandomBitGenerator. Distribution helpers below are
// implemented here rather than through <random> so that sample streams are
// identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}
  constexpr Rng(std::uint64_t seed, std::uint64_t stream) noexcept
      : state_(derive_seed(seed, stream)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to take a logarithm of.
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % bound;
  }

  double exponential() noexcept { return -std::log(uniform_open_zero()); }

 private:
  std::uint64_t state_;
};

}  // namespace randsub
