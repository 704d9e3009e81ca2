#pragma once

#include <cstdint>
#include <random>

namespace ccbm {

/// Named random streams derived from one seed.
enum class RandomStream : std::uint64_t {
  noise = 1,
  test_fields = 2,
};

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for (seed, stream, index); distinct triples give independent streams.
inline std::mt19937_64 make_rng(std::uint64_t seed, RandomStream stream, std::uint64_t index = 0) {
  const std::uint64_t s = splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace ccbm
