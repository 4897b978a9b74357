#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

// Arithmetic over GF(2^8) with reduction polynomial x^8+x^4+x^3+x+1 (0x11B).
// All coding coefficients and payload combinations live in this field.
// Tables are built at compile time; every operation is a pure function.

namespace nc::gf {

using Elem = std::uint8_t;

inline constexpr std::uint16_t kReductionPoly = 0x11B;
inline constexpr Elem kGenerator = 0x03;

namespace detail {

struct Tables {
    Elem exp[512];  // doubled so exp[log a + log b] needs no modulo
    Elem log[256];
};

consteval Tables build_tables() {
    Tables t{};
    std::uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<Elem>(x);
        t.log[x] = static_cast<Elem>(i);
        // multiply by the generator 0x03 = x + 1
        std::uint16_t next = static_cast<std::uint16_t>((x << 1) ^ x);
        if (next & 0x100)
            next ^= kReductionPoly;
        x = next & 0xFF;
    }
    for (int i = 255; i < 512; ++i)
        t.exp[i] = t.exp[i - 255];
    t.log[0] = 0;  // unused; log of zero is undefined
    return t;
}

inline constexpr Tables tables = build_tables();

} // namespace detail

// Addition is XOR; every element is its own additive inverse.
constexpr Elem add(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }
constexpr Elem sub(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }

constexpr Elem mul(Elem a, Elem b) {
    if (a == 0 || b == 0)
        return 0;
    return detail::tables.exp[detail::tables.log[a] + detail::tables.log[b]];
}

// Multiplicative inverse. Zero has none.
constexpr Elem inv(Elem a) {
    if (a == 0)
        throw std::domain_error("gf256: zero has no multiplicative inverse");
    return detail::tables.exp[255 - detail::tables.log[a]];
}

constexpr Elem div(Elem a, Elem b) {
    if (b == 0)
        throw std::domain_error("gf256: division by zero");
    if (a == 0)
        return 0;
    return detail::tables.exp[detail::tables.log[a] + 255 - detail::tables.log[b]];
}

// dst[i] ^= mul(c, src[i]) over equal-length spans.
void axpy(std::span<Elem> dst, std::span<const Elem> src, Elem c);

// dst[i] = mul(c, dst[i])
void scale(std::span<Elem> dst, Elem c);

} // namespace nc::gf
