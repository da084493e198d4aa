#pragma once

#include <cstdint>
#include <random>

namespace ero {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Key of the random stream that drives path `index` of a batch sampled with `seed`.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Child seed of `master` for a labelled purpose (train batch, test batch, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
    return mix64(master ^ mix64(0xa0761d6478bd642fULL * (label + 1)));
}

using PathEngine = std::mt19937_64;

/// Engine for one path: a pure function of (seed, path index).
inline PathEngine path_engine(std::uint64_t seed, std::uint64_t index) {
    return PathEngine(stream_key(seed, index));
}

}  // namespace ero
