#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chemprompt {

// FNV-1a. Stable across platforms and releases: fixture keys and question
// seeds are derived from these, so the constants must never change.
constexpr std::uint64_t kFnvOffset64 = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime64 = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset64) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime64;
    }
    return h;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h = kFnvOffset64) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= kFnvPrime64;
    }
    return h;
}

// 128-bit variant used for backend request keys, where 64 bits would make
// accidental collisions across large fixture files plausible.
struct Hash128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    bool operator==(const Hash128&) const = default;
    std::string hex() const;
};

Hash128 fnv1a128(std::string_view bytes);

// SplitMix64: the per-question deterministic draw stream.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Unbiased enough for bucket counts <= a few thousand.
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
};

}  // namespace chemprompt
