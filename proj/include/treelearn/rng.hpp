#pragma once

#include <cstdint>
#include <random>

namespace treelearn {

// All randomness flows through mt19937_64, which is bit-reproducible across
// platforms. Per-instance streams are derived from a master seed with
// splitmix64 so instances can run in any order (or in parallel) without
// changing results.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return splitmix64(master_seed ^ splitmix64(stream_id));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// uniform_int_distribution is not portable across standard libraries; use
// explicit rejection sampling instead.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Uniform double in [0,1).
inline double uniform_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace treelearn
