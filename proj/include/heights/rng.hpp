#pragma once

#include <cstdint>
#include <random>

namespace heights {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive decorrelated seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream seed is a pure function of (master, index); replica i always sees the
// same stream no matter which worker runs it.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_stream_seed(master, index));
}

}  // namespace heights
