#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace guipilot {

// FNV-1a, 64 bit. Used for state signatures, view digests and cache keys.
// Stable across platforms and process runs, unlike std::hash.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string hex_digest(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace guipilot
