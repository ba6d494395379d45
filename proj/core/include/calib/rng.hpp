#pragma once

#include <cstdint>
#include <random>

namespace calib {

// splitmix64 finalizer; decorrelates seeds that differ in a few bits
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// independent substream for (seed, index); lets parallel workers draw
// reproducibly regardless of schedule
inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(seed, index));
}

}  // namespace calib
