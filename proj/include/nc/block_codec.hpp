#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nc/gf256.hpp"

// Systematic block RLNC. A block buffers up to K source payloads; each is
// forwarded at once as a systematic symbol (unit coefficient row), and when
// the block fills (or an idle flush fires) N-K coded symbols are emitted,
// each a random linear combination of the buffered symbols. The decoder
// keeps the per-block coefficient matrix in reduced row-echelon form and
// releases all K payloads once rank K is reached; abandoned blocks can
// salvage every slot whose unit vector survives in the row space.

namespace nc {

struct CodingParams {
    int k = 10;             // source packets per block
    int n = 15;             // total packets per block (k + redundancy)
    int symbol_size = 1202; // octets per coding slot, incl. 2-octet length prefix

    int redundancy() const { return n - k; }
    int max_payload() const { return symbol_size - 2; }
    // throws std::invalid_argument on out-of-range geometry
    void validate() const;
};

enum class SymbolKind : std::uint8_t { systematic = 0, coded = 1 };

struct CodedSymbol {
    std::uint32_t block_id = 0;
    SymbolKind kind = SymbolKind::systematic;
    std::uint8_t slot = 0;                 // meaningful for systematic only
    std::uint8_t k = 0;                    // block geometry as stamped on the wire
    std::uint8_t n = 0;
    std::uint16_t symbol_size = 0;
    std::vector<gf::Elem> coefficients;    // k entries for coded, empty for systematic
    std::vector<std::uint8_t> symbol;      // symbol_size octets

    // Full-width coefficient row (unit vector for systematic symbols).
    std::vector<gf::Elem> coefficient_row() const;

    bool operator==(const CodedSymbol&) const = default;
};

// [2-octet big-endian length | payload | zero padding] into a fixed slot.
std::vector<std::uint8_t> frame_payload(std::span<const std::uint8_t> payload,
                                        int symbol_size);
// Inverse of frame_payload. Lengths beyond symbol_size-2 are clamped; they
// cannot be produced by frame_payload.
std::vector<std::uint8_t> unframe_payload(std::span<const std::uint8_t> symbol);

// symbol = sum_j mul(coeffs[j], rows[j]); rows must share one length.
std::vector<std::uint8_t> combine(std::span<const std::vector<std::uint8_t>> rows,
                                  std::span<const gf::Elem> coeffs);

class BlockEncoder {
public:
    explicit BlockEncoder(CodingParams params);

    // Frames and buffers one payload, returning the systematic symbol to
    // transmit. Throws std::length_error for oversize payloads and
    // std::logic_error when the block is already full.
    CodedSymbol push(std::span<const std::uint8_t> payload);

    // Emits n-k coded symbols over the currently buffered payloads with
    // coefficients drawn from a generator seeded by rng_seed, then advances
    // to the next block. Flushing an empty block is a no-op.
    std::vector<CodedSymbol> flush(std::uint64_t rng_seed);

    std::uint32_t block_id() const { return block_id_; }
    int buffered() const { return static_cast<int>(buffered_.size()); }
    bool full() const { return buffered() >= params_.k; }
    const CodingParams& params() const { return params_; }

private:
    CodingParams params_;
    std::uint32_t block_id_ = 0;
    std::vector<std::vector<std::uint8_t>> buffered_;  // framed symbols
};

class BlockDecoder {
public:
    // Geometry comes from the first symbol observed for the block; a later
    // header with a smaller k (partial-block flush) shrinks the matrix.
    BlockDecoder(std::uint32_t block_id, int k, int symbol_size);

    // Row-reduces the symbol into the matrix. Returns 1 if the rank grew,
    // 0 if the symbol was linearly dependent (discarded) or the block was
    // already released. Throws std::invalid_argument on block id or symbol
    // size mismatch.
    int insert(const CodedSymbol& sym);

    bool decodable() const { return rank_ == k_; }
    int rank() const { return rank_; }
    int k() const { return k_; }
    std::uint32_t block_id() const { return block_id_; }
    bool released() const { return released_; }

    // All k payloads in slot order. Requires rank == k; throws
    // std::logic_error otherwise. Marks the block released.
    std::vector<std::vector<std::uint8_t>> release();

    struct SalvagedPayload {
        int slot;
        std::vector<std::uint8_t> payload;
    };
    // Payloads of slots recoverable from the reduced matrix: exactly those
    // whose unit vector lies in the current row space.
    std::vector<SalvagedPayload> salvage() const;

    // Row-echelon snapshot for inspection: k rows of k coefficients, zero
    // rows where no pivot exists yet.
    std::vector<std::vector<gf::Elem>> coefficient_rows() const;

private:
    struct Row {
        std::vector<gf::Elem> coeffs;
        std::vector<std::uint8_t> symbol;
    };

    void shrink_to(int new_k);
    bool row_is_unit(int pivot) const;

    std::uint32_t block_id_;
    int k_;
    int symbol_size_;
    int rank_ = 0;
    bool released_ = false;
    std::vector<std::optional<Row>> pivots_;  // index = pivot column
};

} // namespace nc
