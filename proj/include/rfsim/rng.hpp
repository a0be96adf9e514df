#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rfsim {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed for an independent substream (per tree, per fold, per feature...).
// Adding streams never reshuffles earlier ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x51ed270b7a14c8d5ull));
}

// Bounded draw in [0, n). Multiply-shift instead of
// std::uniform_int_distribution, whose algorithm is implementation-defined;
// this keeps streams identical across standard libraries.
inline std::uint64_t next_below(Rng& rng, std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(rng()) * n) >> 64);
}

// Uniform in [0, 1) with 53 random bits.
inline double next_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double next_uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * next_unit(rng);
}

// Box-Muller. std::normal_distribution is implementation-defined as well.
inline double next_normal(Rng& rng) {
    double u;
    do {
        u = next_unit(rng);
    } while (u <= 0.0);
    const double v = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

// Fisher-Yates with portable bounded draws.
template <typename T>
void shuffle_portable(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[next_below(rng, i)]);
    }
}

}  // namespace rfsim
