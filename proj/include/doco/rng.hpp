#pragma once

#include <cstdint>
#include <random>

namespace doco {

// What a random stream is used for. Each (seed, unit, purpose) triple maps to
// an independent engine, so results never depend on execution order.
enum class StreamPurpose : std::uint64_t {
  kData = 1,
  kExploration = 2,
  kShuffle = 3,
  kValidation = 4,
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng derive_rng(std::uint64_t master_seed, std::uint64_t unit, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ (unit + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

}  // namespace doco
