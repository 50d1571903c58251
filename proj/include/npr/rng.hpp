#pragma once

#include <cstdint>
#include <random>

namespace npr {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for (master seed, stream index). Streams depend only on
// their index, so replicates can run in any order or in parallel.
inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t stream) {
    std::uint64_t s = splitmix64(master_seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

}  // namespace npr
