#pragma once

#include <cstdint>
#include <random>

namespace hypermap {

// Seeded uniform source. Doubles are derived from the raw 64-bit stream
// directly ((x >> 11) * 2^-53) rather than through std::uniform_real_distribution,
// so a seed produces the same sequence on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [0, 2*pi).
  double angle() { return uniform() * 6.283185307179586476925286766559; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hypermap
