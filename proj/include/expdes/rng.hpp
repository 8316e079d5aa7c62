#pragma once

#include <cstdint>

namespace expdes {

// Deterministic 64-bit-seeded generator (xoshiro256**). Sub-streams are
// derived from (seed, stream) so parallel components never share a stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform double in [0, 1).
  double uniform();

  // Uniform integer in [0, n), n >= 1. Rejection sampled, unbiased.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller. Two uniforms per call, no cached spare,
  // so the draw sequence is independent of call interleaving.
  double normal();

  // +1 or -1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  std::uint64_t s_[4];
};

}  // namespace expdes
