#pragma once

#include <cstdint>
#include <random>

namespace fibstat {

/// splitmix64 finaliser, used to derive independent per-chunk seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk)
{
    return splitmix64(splitmix64(seed) ^ (chunk * 0xd1b54a32d192ed03ULL));
}

/// Uniform integer in [0, m), by rejection; identical on every platform
/// (std::uniform_int_distribution is not).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t m)
{
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit) return v % m;
    }
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace fibstat
