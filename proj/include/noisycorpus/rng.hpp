// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>

namespace noisycorpus {

// Deterministic splitmix64 stream. Self-contained so that (seed -> output)
// is identical across compilers and standard libraries; std::mt19937 plus
// the standard distributions would not give that guarantee.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool chance(double p) { return next_double() < p; }

private:
  std::uint64_t state_;
};

// Mixes stream coordinates into a base seed so that per-sentence / per-epoch
// streams are independent and order-insensitive (safe under sharding).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(seed, a, b), c);
}

}  // namespace noisycorpus
