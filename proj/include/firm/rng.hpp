#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "firm/errors.hpp"

namespace firm {

// Mixes a seed with a salt so subsystems get independent deterministic
// streams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream.  The distribution helpers are hand-rolled on
// top of mt19937_64 because the standard library's distribution objects are
// implementation-defined and would break cross-toolchain reproducibility.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 usable bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Fair coin from the top bit.
  bool coin() { return (next_u64() >> 63) != 0; }

  // Uniform integer in [0, n).  Rejection sampling, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ValidationError("uniform_below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t v = next_u64();
    while (v > limit) v = next_u64();
    return v % n;
  }

  // Exponential inter-arrival gap with the given rate (events per time unit).
  double exponential(double rate) {
    if (rate <= 0) throw ValidationError("exponential: rate must be positive");
    return -std::log1p(-uniform01()) / rate;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace firm
