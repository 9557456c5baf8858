#pragma once

#include <cstdint>

namespace mimocc {

// Counter-based generator built on the SplitMix64 finalizer, so any language
// can reproduce the exact byte stream. Definitions:
//
//   GAMMA = 0x9E3779B97F4A7C15
//   mix(z) = { z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//              return z ^ (z >> 31); }
//
//   word(key, i)    = mix(key + (i + 1) * GAMMA)             (i = 0, 1, ...)
//   substream(k, j) = mix(k + (j + 1) * 0xD1B54A32D192ED03)  (64-bit key)
//
// word(key, .) is an indexable uniform u64 stream; substream derives
// independent child keys (per user, per realization, ...).
struct CounterRng {
  std::uint64_t key = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t substream(std::uint64_t key, std::uint64_t j) {
    return mix(key + (j + 1) * 0xD1B54A32D192ED03ULL);
  }

  std::uint64_t word(std::uint64_t i) const {
    return mix(key + (i + 1) * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on (0, 1]: 53 mantissa bits, never exactly 0.
  double uniform_open(std::uint64_t i) const {
    return static_cast<double>((word(i) >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double uniform(std::uint64_t i) const {
    return static_cast<double>(word(i) >> 11) * 0x1.0p-53;
  }
};

}  // namespace mimocc
