#pragma once

#include <cstdint>

namespace fracspde {

/// SplitMix64 finalizer (Steele, Lea and Flood): a bijective 64-bit avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of stream `index` under `base`: mix64(base + (index + 1) * golden gamma).
/// Run k of an ensemble always gets derive_seed(base, k), whatever the thread
/// schedule.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Stream used for random initial data; disjoint from the run streams in practice.
inline constexpr std::uint64_t kInitialDataStream = 0xFFFF'FFFF'FFFF'FFFFULL;

}  // namespace fracspde
