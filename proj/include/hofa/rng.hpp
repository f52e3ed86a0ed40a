#pragma once

#include <cstdint>

namespace hofa {

// Counter-based pseudorandom generator. Output i of stream s seeded with
// seed is mix(hash(seed, s) + (i+1) * kGamma), where mix is the SplitMix64
// finalizer. The constants are fixed so that identical (seed, stream,
// counter) triples reproduce identical values on every platform.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed + kGamma * (stream + 1))), counter_(0) {}

  // Independent stream derived from the same seed material.
  CounterRng split(std::uint64_t stream) const {
    CounterRng r(0);
    r.base_ = mix(base_ + kGamma * (stream + 1));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGamma); }

  // Uniform in [0,1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0,n), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace hofa
