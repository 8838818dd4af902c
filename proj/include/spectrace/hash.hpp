#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace spectrace {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

// Pairwise combine for folder/repo scope fingerprints.
inline std::uint64_t fnv_combine(std::uint64_t a, std::uint64_t b) {
    char buf[16];
    for (int i = 0; i < 8; ++i) buf[i] = char((a >> (8 * i)) & 0xff);
    for (int i = 0; i < 8; ++i) buf[8 + i] = char((b >> (8 * i)) & 0xff);
    return fnv1a64(std::string_view(buf, 16));
}

inline std::string to_hex(std::uint64_t v, int digits = 16) {
    static const char* hex = "0123456789abcdef";
    std::string out(digits, '0');
    for (int i = digits - 1; i >= 0; --i) {
        out[i] = hex[v & 0xf];
        v >>= 4;
    }
    return out;
}

// splitmix64: deterministic stream generator used by the hash embedder.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace spectrace
