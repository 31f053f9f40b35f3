#pragma once

// MD5 (RFC 1321). The general routine handles arbitrary messages; md5_u64le is
// the single-block fast path used by the truncated one-way function.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>

namespace rdp::md5 {

using Digest = std::array<std::uint8_t, 16>;

namespace detail {

inline constexpr std::array<std::uint32_t, 64> kSine = {
    0xd76aa478, 0xe8c7b756, 0x242070db, 0xc1bdceee, 0xf57c0faf, 0x4787c62a, 0xa8304613, 0xfd469501,
    0x698098d8, 0x8b44f7af, 0xffff5bb1, 0x895cd7be, 0x6b901122, 0xfd987193, 0xa679438e, 0x49b40821,
    0xf61e2562, 0xc040b340, 0x265e5a51, 0xe9b6c7aa, 0xd62f105d, 0x02441453, 0xd8a1e681, 0xe7d3fbc8,
    0x21e1cde6, 0xc33707d6, 0xf4d50d87, 0x455a14ed, 0xa9e3e905, 0xfcefa3f8, 0x676f02d9, 0x8d2a4c8a,
    0xfffa3942, 0x8771f681, 0x6d9d6122, 0xfde5380c, 0xa4beea44, 0x4bdecfa9, 0xf6bb4b60, 0xbebfbc70,
    0x289b7ec6, 0xeaa127fa, 0xd4ef3085, 0x04881d05, 0xd9d4d039, 0xe6db99e5, 0x1fa27cf8, 0xc4ac5665,
    0xf4292244, 0x432aff97, 0xab9423a7, 0xfc93a039, 0x655b59c3, 0x8f0ccc92, 0xffeff47d, 0x85845dd1,
    0x6fa87e4f, 0xfe2ce6e0, 0xa3014314, 0x4e0811a1, 0xf7537e82, 0xbd3af235, 0x2ad7d2bb, 0xeb86d391,
};

inline constexpr std::array<int, 64> kShift = {
    7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22, 7, 12, 17, 22,
    5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20, 5, 9,  14, 20,
    4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23, 4, 11, 16, 23,
    6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21, 6, 10, 15, 21,
};

inline constexpr std::array<std::uint32_t, 4> kInit = {0x67452301, 0xefcdab89, 0x98badcfe, 0x10325476};

// One compression over a 16-word little-endian block. Written with constant
// indices so the compiler can fold zero words in the single-block fast path.
inline void compress(std::array<std::uint32_t, 4>& state, const std::uint32_t* m) {
    std::uint32_t a = state[0], b = state[1], c = state[2], d = state[3];
    for (int i = 0; i < 64; ++i) {
        std::uint32_t f;
        int g;
        if (i < 16) {
            f = (b & c) | (~b & d);
            g = i;
        } else if (i < 32) {
            f = (d & b) | (~d & c);
            g = (5 * i + 1) & 15;
        } else if (i < 48) {
            f = b ^ c ^ d;
            g = (3 * i + 5) & 15;
        } else {
            f = c ^ (b | ~d);
            g = (7 * i) & 15;
        }
        const std::uint32_t tmp = d;
        d = c;
        c = b;
        b = b + std::rotl(a + f + kSine[i] + m[g], kShift[i]);
        a = tmp;
    }
    state[0] += a;
    state[1] += b;
    state[2] += c;
    state[3] += d;
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

} // namespace detail

/// Digest of an arbitrary byte string.
inline Digest digest(std::span<const std::uint8_t> message) {
    auto state = detail::kInit;
    std::uint32_t block[16];

    const std::size_t full = message.size() / 64;
    for (std::size_t b = 0; b < full; ++b) {
        for (int w = 0; w < 16; ++w) block[w] = detail::load_le32(message.data() + b * 64 + w * 4);
        detail::compress(state, block);
    }

    // Tail plus padding: 0x80, zeros, 64-bit bit length.
    std::uint8_t tail[128] = {};
    const std::size_t rest = message.size() - full * 64;
    if (rest != 0) std::memcpy(tail, message.data() + full * 64, rest);
    tail[rest] = 0x80;
    const std::size_t tail_len = rest < 56 ? 64 : 128;
    const std::uint64_t bits = std::uint64_t(message.size()) * 8;
    for (int k = 0; k < 8; ++k) tail[tail_len - 8 + k] = std::uint8_t(bits >> (8 * k));
    for (std::size_t off = 0; off < tail_len; off += 64) {
        for (int w = 0; w < 16; ++w) block[w] = detail::load_le32(tail + off + w * 4);
        detail::compress(state, block);
    }

    Digest out{};
    for (int w = 0; w < 4; ++w)
        for (int k = 0; k < 4; ++k) out[w * 4 + k] = std::uint8_t(state[w] >> (8 * k));
    return out;
}

/// MD5 of the 8-byte little-endian encoding of `x`; returns the first 8 digest
/// bytes read as a little-endian integer.
inline std::uint64_t md5_u64le(std::uint64_t x) {
    auto state = detail::kInit;
    const std::uint32_t block[16] = {
        std::uint32_t(x), std::uint32_t(x >> 32), 0x80, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 64, 0,
    };
    detail::compress(state, block);
    return std::uint64_t(state[0]) | (std::uint64_t(state[1]) << 32);
}

} // namespace rdp::md5
