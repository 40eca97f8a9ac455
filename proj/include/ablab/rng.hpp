#pragma once

#include <cstdint>
#include <random>

namespace ablab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for item `index` of a run seeded with `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(index + 1))};
  return std::mt19937_64(seq);
}

}  // namespace ablab
