#pragma once

#include <cstdint>
#include <random>

namespace glkde {

//! Splittable per-task seed: SplitMix64 finalizer applied to
//! base + (index + 1) * golden gamma. Tasks seeded this way are
//! deterministic regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

//! mt19937_64 wrapped with explicit variate transforms. The standard
//! distributions are implementation-defined, so uniform and normal draws
//! are derived here directly to keep sequences reproducible.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  //! Uniform on the open interval (0, 1): 53-bit mantissa, half-ulp offset.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  //! Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

private:
  std::mt19937_64 gen_;
};

} // namespace glkde
