#include "nc/wire_format.hpp"

#include <algorithm>
#include <stdexcept>

namespace nc::wire {

const char* to_string(ParseError e) {
    switch (e) {
    case ParseError::none: return "none";
    case ParseError::truncated: return "truncated";
    case ParseError::bad_magic: return "bad_magic";
    case ParseError::bad_version: return "bad_version";
    case ParseError::bad_params: return "bad_params";
    case ParseError::bad_slot: return "bad_slot";
    case ParseError::bad_length: return "bad_length";
    }
    return "unknown";
}

std::size_t datagram_size(const CodedSymbol& sym) {
    return kHeaderSize +
           (sym.kind == SymbolKind::coded ? static_cast<std::size_t>(sym.k) : 0) +
           sym.symbol_size;
}

std::vector<std::uint8_t> serialize(const CodedSymbol& sym) {
    if (sym.k == 0 || sym.n < sym.k || sym.symbol_size < 3)
        throw std::invalid_argument("wire: malformed symbol geometry");
    if (sym.kind == SymbolKind::systematic && sym.slot >= sym.k)
        throw std::invalid_argument("wire: systematic slot out of range");
    if (sym.kind == SymbolKind::coded && sym.coefficients.size() != sym.k)
        throw std::invalid_argument("wire: coefficient count != k");
    if (sym.symbol.size() != sym.symbol_size)
        throw std::invalid_argument("wire: symbol length != symbol_size");

    std::vector<std::uint8_t> out;
    out.reserve(datagram_size(sym));
    out.push_back(kMagic0);
    out.push_back(kMagic1);
    out.push_back(kVersion);
    out.push_back(sym.kind == SymbolKind::coded ? kCodedMarker : sym.slot);
    out.push_back(static_cast<std::uint8_t>(sym.block_id >> 24));
    out.push_back(static_cast<std::uint8_t>(sym.block_id >> 16));
    out.push_back(static_cast<std::uint8_t>(sym.block_id >> 8));
    out.push_back(static_cast<std::uint8_t>(sym.block_id));
    out.push_back(sym.k);
    out.push_back(sym.n);
    out.push_back(static_cast<std::uint8_t>(sym.symbol_size >> 8));
    out.push_back(static_cast<std::uint8_t>(sym.symbol_size));
    if (sym.kind == SymbolKind::coded)
        out.insert(out.end(), sym.coefficients.begin(), sym.coefficients.end());
    out.insert(out.end(), sym.symbol.begin(), sym.symbol.end());
    return out;
}

ParseResult parse(std::span<const std::uint8_t> d) {
    ParseResult r;
    if (d.size() < kHeaderSize) {
        r.error = ParseError::truncated;
        return r;
    }
    if (d[0] != kMagic0 || d[1] != kMagic1) {
        r.error = ParseError::bad_magic;
        return r;
    }
    if (d[2] != kVersion) {
        r.error = ParseError::bad_version;
        return r;
    }
    const std::uint8_t kind_slot = d[3];
    const std::uint32_t block_id = (static_cast<std::uint32_t>(d[4]) << 24) |
                                   (static_cast<std::uint32_t>(d[5]) << 16) |
                                   (static_cast<std::uint32_t>(d[6]) << 8) |
                                   static_cast<std::uint32_t>(d[7]);
    const std::uint8_t k = d[8];
    const std::uint8_t n = d[9];
    const std::uint16_t symbol_size =
        static_cast<std::uint16_t>((static_cast<std::uint16_t>(d[10]) << 8) | d[11]);
    if (k == 0 || n < k || symbol_size < 3) {
        r.error = ParseError::bad_params;
        return r;
    }
    const bool coded = kind_slot == kCodedMarker;
    if (!coded && kind_slot >= k) {
        r.error = ParseError::bad_slot;
        return r;
    }
    const std::size_t expected =
        kHeaderSize + (coded ? static_cast<std::size_t>(k) : 0) + symbol_size;
    if (d.size() < expected) {
        r.error = ParseError::truncated;
        return r;
    }
    if (d.size() > expected) {
        r.error = ParseError::bad_length;
        return r;
    }

    CodedSymbol& s = r.symbol;
    s.block_id = block_id;
    s.kind = coded ? SymbolKind::coded : SymbolKind::systematic;
    s.slot = coded ? 0xFF : kind_slot;
    s.k = k;
    s.n = n;
    s.symbol_size = symbol_size;
    auto body = d.begin() + kHeaderSize;
    if (coded) {
        s.coefficients.assign(body, body + k);
        body += k;
    }
    s.symbol.assign(body, body + symbol_size);
    return r;
}

} // namespace nc::wire
