#pragma once

#include <cstdint>
#include <random>

namespace cadent {

/// Seedable, splittable generator used by every stochastic component.
///
/// Streams are derived with a SplitMix64 finalizer so that (seed, index)
/// pairs map to decorrelated mt19937_64 states. Integer and real draws are
/// implemented here rather than through <random> distributions, whose
/// algorithms are implementation-defined, so runs reproduce bit-for-bit
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Independent child stream for (seed, index).
  static Rng derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  // Uniform real in [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cadent
