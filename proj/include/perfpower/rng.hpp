#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace perfpower {

// SplitMix64 finalizer. Bijective on 64-bit words, so chained derivations
// below never collapse distinct index tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a child seed from a master seed and up to three stream indices
// (typically unit, action, replicate). The derivation is a pure function of
// the tuple, so evaluation order cannot change any downstream draw.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed ^ 0x5851f42d4c957f2dULL));
}

// FNV-1a hash; gives actions a stable identity for seed derivation that does
// not depend on their position inside an action set.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace perfpower
