#pragma once

#include <cstdint>

namespace osmp {

// SplitMix64 in counter mode: output i of stream (seed, stream) is
// mix(key + i * golden), key = mix(seed ^ mix(stream)). Any (seed, stream)
// pair is an independent, reproducible sequence, so work can be split into
// shards without coordinating state.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + kGolden))) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * kGolden); }

  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace osmp
