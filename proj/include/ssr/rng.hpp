#pragma once

#include <cstdint>

namespace ssr {

/// Counter-based uniform stream: draw `ctr` of the splitmix64 sequence with
/// the given seed. Pure function of (seed, ctr), so replicates can be
/// evaluated in any order, on any number of threads, with identical results.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t ctr) {
  std::uint64_t x = seed + (ctr + 1) * 0x9E3779B97F4A7C15ULL;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Uniform draw strictly inside (0, 1).
inline double uniform_open01(std::uint64_t seed, std::uint64_t ctr) {
  return (static_cast<double>(splitmix64_at(seed, ctr) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace ssr
