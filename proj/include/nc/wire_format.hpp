#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nc/block_codec.hpp"

// Datagram layout exchanged between the encoder and decoder proxies.
// Fixed 12-octet header, multi-octet fields big-endian:
//
//   offset  size  field
//   0       2     magic 0x4E 0x43
//   2       1     version 0x01
//   3       1     kind/slot: 0x00..0xFE systematic slot index, 0xFF coded
//   4       4     block id
//   8       1     k (source packets in block)
//   9       1     n (total packets in block)
//   10      2     symbol size
//   12      k     coefficients (coded symbols only)
//   12(+k)  ss    symbol
//
// Total length is exactly 12 + (coded ? k : 0) + symbol_size. k and n are
// capped at 255 so a slot index (< k <= 255) can never collide with the
// 0xFF coded marker. Geometry travels in every packet so a decoder can
// bootstrap mid-stream.

namespace nc::wire {

inline constexpr std::uint8_t kMagic0 = 0x4E;
inline constexpr std::uint8_t kMagic1 = 0x43;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kCodedMarker = 0xFF;
inline constexpr std::size_t kHeaderSize = 12;

enum class ParseError : std::uint8_t {
    none = 0,
    truncated,    // shorter than the header or the declared body
    bad_magic,
    bad_version,
    bad_params,   // k == 0, n < k, or symbol_size < 3
    bad_slot,     // systematic slot index >= k
    bad_length,   // trailing octets after the declared body
};

const char* to_string(ParseError e);

std::size_t datagram_size(const CodedSymbol& sym);

// Exact layout above; deterministic byte-for-byte. The symbol must satisfy
// the block_codec invariants (throws std::invalid_argument otherwise).
std::vector<std::uint8_t> serialize(const CodedSymbol& sym);

struct ParseResult {
    ParseError error = ParseError::none;
    CodedSymbol symbol;

    bool ok() const { return error == ParseError::none; }
};

// Total over arbitrary input: never reads out of bounds, never throws;
// malformed datagrams come back with a stable error class.
ParseResult parse(std::span<const std::uint8_t> datagram);

} // namespace nc::wire
