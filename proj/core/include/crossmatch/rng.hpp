#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crossmatch {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a root seed and a path of
/// integer coordinates (e.g. {t, replicate}). SplitMix64 finalizer chain.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(root);
  for (auto p : path) h = mix(h ^ mix(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(root, path));
}

}  // namespace crossmatch
