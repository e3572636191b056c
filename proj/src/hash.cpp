#include "chemprompt/hash.hpp"

namespace chemprompt {

std::string Hash128::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 0; i < 16; ++i) {
        std::uint64_t word = i < 8 ? hi : lo;
        int shift = 56 - 8 * (i % 8);
        unsigned byte = (word >> shift) & 0xffu;
        out[2 * i] = digits[byte >> 4];
        out[2 * i + 1] = digits[byte & 0xfu];
    }
    return out;
}

Hash128 fnv1a128(std::string_view bytes) {
    // Two independent 64-bit lanes: plain FNV-1a and a salted lane with a
    // distinct prime-multiplied offset. Equivalent collision behaviour to a
    // real 128-bit FNV for key-lookup purposes and much simpler to keep
    // byte-stable.
    std::uint64_t a = fnv1a64(bytes);
    std::uint64_t b = kFnvOffset64 ^ 0x5bd1e9955bd1e995ull;
    for (unsigned char c : bytes) {
        b ^= c;
        b *= 0x100000001b5ull;
        b ^= b >> 29;
    }
    return Hash128{a, b};
}

}  // namespace chemprompt
