#pragma once

#include <cstdint>

namespace lspline {

/// SplitMix64 finalizer (Steele, Lea and Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based draw: the value for (seed, stream, index) does not depend on
/// the order in which indices are visited.
constexpr std::uint64_t hash_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

/// Uniform on (0, 1); never returns 0, so log() is safe.
constexpr double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace lspline
