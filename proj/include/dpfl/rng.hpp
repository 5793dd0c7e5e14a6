#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace dpfl {

/// Portable seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions below are implemented here rather than taken
/// from <random>, since the standard library distributions are allowed to
/// differ between implementations. Together this makes every draw a pure
/// function of (seed, number of previous draws) on any platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() {
    ++counter_;
    return engine_();
  }

  // Uniform in [0, 1) with 53 bits of resolution; one word per call.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::size_t uniform_index(std::size_t n);

  // Standard normal via Box-Muller (two words per call, no caching).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer. Used to derive independent sub-seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace dpfl
