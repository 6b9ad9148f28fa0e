#pragma once

#include <cstdint>
#include <random>

namespace agginc {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of family `stream` under `seed`. Independent of call order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

// Stream tags, kept distinct so that no two consumers share draws.
namespace streams {
inline constexpr std::uint64_t kQuantileBootstrap = 0x51;
inline constexpr std::uint64_t kCorrectionBootstrap = 0x52;
inline constexpr std::uint64_t kRandomDesign = 0x53;
inline constexpr std::uint64_t kDataX = 0x61;
inline constexpr std::uint64_t kDataY = 0x62;
inline constexpr std::uint64_t kModel = 0x63;
}  // namespace streams

}  // namespace agginc
