#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace vitalsel {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of stream
// coordinates (subject, generation, tree index, ...). Order matters.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t s = splitmix64(base);
    for (auto p : path) {
        s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return s;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(base, path));
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double sd = 1.0)
{
    return std::normal_distribution<double>(mean, sd)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace vitalsel
