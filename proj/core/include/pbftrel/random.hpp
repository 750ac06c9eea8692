#pragma once

#include <cstdint>
#include <random>

namespace pbftrel {

// Deterministic stream keyed by (seed, stream index). Streams for different indices are
// seeded independently through std::seed_seq, so replications never share state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Exponential with the given rate (> 0).
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pbftrel
