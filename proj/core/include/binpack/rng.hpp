#pragma once

#include <cstdint>
#include <random>

namespace binpack {

// Deterministic random source. All distribution transforms are implemented
// here rather than with <random> distributions, whose output is
// implementation-defined; this keeps byte-exact reproducibility across
// standard libraries.
class RandomEngine {
 public:
  explicit RandomEngine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  int uniform_int(int lo, int hi);

  // Standard normal via Box-Muller. Consumes exactly two uniforms per call;
  // the sine partner is discarded so the stream layout stays simple.
  double normal();

  // Derives an independent sub-stream seed; used to give each component of a
  // run (data, init, sampling, ...) its own engine from one master seed.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
};

}  // namespace binpack
