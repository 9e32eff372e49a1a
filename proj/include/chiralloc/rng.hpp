#pragma once

#include <cstdint>

namespace chiralloc::rng {

// SplitMix64 finalizer. Bijective on 64-bit words, which is what makes the
// keyed streams below collision-free for distinct keys at a fixed seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based keyed hash: the value depends only on (seed, key), never on
// call order, so realizations and sites can be drawn in any order or thread.
constexpr std::uint64_t keyed(std::uint64_t seed, std::uint64_t key) noexcept {
  return mix64(seed ^ mix64(key + 0x632be59bd9b4e019ULL));
}

// Seed of realization `index` in an ensemble started from `base_seed`.
constexpr std::uint64_t realization_seed(std::uint64_t base_seed,
                                         std::uint64_t index) noexcept {
  return keyed(mix64(base_seed), index);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace chiralloc::rng
