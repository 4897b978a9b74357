#include "nc/gf256.hpp"

namespace nc::gf {

void axpy(std::span<Elem> dst, std::span<const Elem> src, Elem c) {
    if (dst.size() != src.size())
        throw std::invalid_argument("gf256: axpy length mismatch");
    if (c == 0)
        return;
    if (c == 1) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] ^= src[i];
        return;
    }
    const int log_c = detail::tables.log[c];
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const Elem s = src[i];
        if (s != 0)
            dst[i] ^= detail::tables.exp[log_c + detail::tables.log[s]];
    }
}

void scale(std::span<Elem> dst, Elem c) {
    if (c == 1)
        return;
    if (c == 0) {
        for (Elem& v : dst)
            v = 0;
        return;
    }
    const int log_c = detail::tables.log[c];
    for (Elem& v : dst) {
        if (v != 0)
            v = detail::tables.exp[log_c + detail::tables.log[v]];
    }
}

} // namespace nc::gf
