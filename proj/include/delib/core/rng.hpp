#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace delib::core {

// 53-bit uniform draw in [0,1). Bit-for-bit reproducible across platforms,
// which std::uniform_real_distribution does not guarantee.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace detail

// Stable sub-seed derivation: mixes a textual tag and up to two indices into
// the base seed so distinct streams never share state.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t z = detail::splitmix64(base ^ detail::fnv1a(tag));
    z = detail::splitmix64(z ^ a);
    return detail::splitmix64(z ^ b);
}

}  // namespace delib::core
