#include "nc/block_codec.hpp"

#include <algorithm>
#include <stdexcept>

#include "nc/rng.hpp"

namespace nc {

void CodingParams::validate() const {
    if (k < 1 || k > 255)
        throw std::invalid_argument("coding: k must be in [1,255]");
    if (n < k || n > 255)
        throw std::invalid_argument("coding: n must be in [k,255]");
    if (symbol_size < 3 || symbol_size > 65507 - 12 - 255)
        throw std::invalid_argument("coding: symbol_size out of range");
}

std::vector<gf::Elem> CodedSymbol::coefficient_row() const {
    if (kind == SymbolKind::coded)
        return coefficients;
    std::vector<gf::Elem> row(k, 0);
    row.at(slot) = 1;
    return row;
}

std::vector<std::uint8_t> frame_payload(std::span<const std::uint8_t> payload,
                                        int symbol_size) {
    if (static_cast<int>(payload.size()) > symbol_size - 2)
        throw std::length_error("coding: payload exceeds symbol capacity");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(symbol_size), 0);
    out[0] = static_cast<std::uint8_t>(payload.size() >> 8);
    out[1] = static_cast<std::uint8_t>(payload.size() & 0xFF);
    std::copy(payload.begin(), payload.end(), out.begin() + 2);
    return out;
}

std::vector<std::uint8_t> unframe_payload(std::span<const std::uint8_t> symbol) {
    if (symbol.size() < 2)
        throw std::invalid_argument("coding: symbol too short to unframe");
    std::size_t len = (static_cast<std::size_t>(symbol[0]) << 8) | symbol[1];
    len = std::min(len, symbol.size() - 2);
    return {symbol.begin() + 2, symbol.begin() + 2 + static_cast<long>(len)};
}

std::vector<std::uint8_t> combine(std::span<const std::vector<std::uint8_t>> rows,
                                  std::span<const gf::Elem> coeffs) {
    if (rows.size() != coeffs.size())
        throw std::invalid_argument("coding: combine rank mismatch");
    if (rows.empty())
        return {};
    std::vector<std::uint8_t> acc(rows[0].size(), 0);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j].size() != acc.size())
            throw std::invalid_argument("coding: combine row length mismatch");
        gf::axpy(acc, rows[j], coeffs[j]);
    }
    return acc;
}

BlockEncoder::BlockEncoder(CodingParams params) : params_(params) {
    params_.validate();
}

CodedSymbol BlockEncoder::push(std::span<const std::uint8_t> payload) {
    if (full())
        throw std::logic_error("coding: push into full block");
    CodedSymbol sym;
    sym.block_id = block_id_;
    sym.kind = SymbolKind::systematic;
    sym.slot = static_cast<std::uint8_t>(buffered_.size());
    sym.k = static_cast<std::uint8_t>(params_.k);
    sym.n = static_cast<std::uint8_t>(params_.n);
    sym.symbol_size = static_cast<std::uint16_t>(params_.symbol_size);
    sym.symbol = frame_payload(payload, params_.symbol_size);
    buffered_.push_back(sym.symbol);
    return sym;
}

std::vector<CodedSymbol> BlockEncoder::flush(std::uint64_t rng_seed) {
    if (buffered_.empty())
        return {};
    const int effective_k = buffered();
    // Fixed redundancy budget per block, also over partial blocks.
    const int redundancy = params_.redundancy();
    Splitmix64 rng(rng_seed);
    std::vector<CodedSymbol> out;
    out.reserve(static_cast<std::size_t>(redundancy));
    for (int i = 0; i < redundancy; ++i) {
        CodedSymbol sym;
        sym.block_id = block_id_;
        sym.kind = SymbolKind::coded;
        sym.slot = 0xFF;
        sym.k = static_cast<std::uint8_t>(effective_k);
        sym.n = static_cast<std::uint8_t>(effective_k + redundancy);
        sym.symbol_size = static_cast<std::uint16_t>(params_.symbol_size);
        sym.coefficients.resize(static_cast<std::size_t>(effective_k));
        for (auto& c : sym.coefficients)
            c = rng.next_byte();
        sym.symbol = combine(buffered_, sym.coefficients);
        out.push_back(std::move(sym));
    }
    buffered_.clear();
    ++block_id_;
    return out;
}

BlockDecoder::BlockDecoder(std::uint32_t block_id, int k, int symbol_size)
    : block_id_(block_id), k_(k), symbol_size_(symbol_size) {
    if (k < 1 || k > 255)
        throw std::invalid_argument("coding: decoder k out of range");
    pivots_.resize(static_cast<std::size_t>(k));
}

void BlockDecoder::shrink_to(int new_k) {
    // Columns >= new_k can only be non-zero if a systematic slot >= new_k
    // arrived, which contradicts the smaller header; refuse in that case.
    for (int col = new_k; col < k_; ++col)
        if (pivots_[static_cast<std::size_t>(col)].has_value())
            return;
    for (auto& p : pivots_)
        if (p)
            p->coeffs.resize(static_cast<std::size_t>(new_k));
    pivots_.resize(static_cast<std::size_t>(new_k));
    k_ = new_k;
}

int BlockDecoder::insert(const CodedSymbol& sym) {
    if (sym.block_id != block_id_)
        throw std::invalid_argument("coding: symbol for different block");
    if (static_cast<int>(sym.symbol_size) != symbol_size_ ||
        static_cast<int>(sym.symbol.size()) != symbol_size_)
        throw std::invalid_argument("coding: symbol size mismatch");
    if (released_)
        return 0;
    if (static_cast<int>(sym.k) < k_)
        shrink_to(sym.k);

    std::vector<gf::Elem> coeffs(static_cast<std::size_t>(k_), 0);
    if (sym.kind == SymbolKind::systematic) {
        if (sym.slot >= k_)
            return 0;  // slot outside the reconciled block; unusable
        coeffs[sym.slot] = 1;
    } else {
        if (static_cast<int>(sym.coefficients.size()) < k_)
            return 0;
        std::copy_n(sym.coefficients.begin(), k_, coeffs.begin());
        // entries beyond k_ must be zero for the symbol to fit this block
        for (std::size_t j = static_cast<std::size_t>(k_); j < sym.coefficients.size(); ++j)
            if (sym.coefficients[j] != 0)
                return 0;
    }
    std::vector<std::uint8_t> symbol = sym.symbol;

    // Reduce against existing pivots.
    for (int col = 0; col < k_; ++col) {
        const gf::Elem c = coeffs[static_cast<std::size_t>(col)];
        if (c == 0)
            continue;
        auto& pivot = pivots_[static_cast<std::size_t>(col)];
        if (!pivot)
            continue;
        gf::axpy(coeffs, pivot->coeffs, c);
        gf::axpy(symbol, pivot->symbol, c);
    }
    const auto lead = std::find_if(coeffs.begin(), coeffs.end(),
                                   [](gf::Elem c) { return c != 0; });
    if (lead == coeffs.end())
        return 0;  // linearly dependent
    const int col = static_cast<int>(lead - coeffs.begin());

    // Normalize the pivot to 1 and clear the column from the other rows,
    // keeping the matrix in reduced row-echelon form.
    const gf::Elem scale_by = gf::inv(*lead);
    gf::scale(coeffs, scale_by);
    gf::scale(symbol, scale_by);
    for (auto& p : pivots_) {
        if (!p)
            continue;
        const gf::Elem f = p->coeffs[static_cast<std::size_t>(col)];
        if (f != 0) {
            gf::axpy(p->coeffs, coeffs, f);
            gf::axpy(p->symbol, symbol, f);
        }
    }
    pivots_[static_cast<std::size_t>(col)] = Row{std::move(coeffs), std::move(symbol)};
    ++rank_;
    return 1;
}

std::vector<std::vector<std::uint8_t>> BlockDecoder::release() {
    if (rank_ != k_)
        throw std::logic_error("coding: release before rank k");
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(static_cast<std::size_t>(k_));
    // At full rank the reduced matrix is the identity; each pivot row holds
    // the original framed symbol for its slot.
    for (int slot = 0; slot < k_; ++slot)
        out.push_back(unframe_payload(pivots_[static_cast<std::size_t>(slot)]->symbol));
    released_ = true;
    return out;
}

bool BlockDecoder::row_is_unit(int pivot) const {
    const auto& row = *pivots_[static_cast<std::size_t>(pivot)];
    for (int col = 0; col < k_; ++col) {
        const gf::Elem want = (col == pivot) ? 1 : 0;
        if (row.coeffs[static_cast<std::size_t>(col)] != want)
            return false;
    }
    return true;
}

std::vector<BlockDecoder::SalvagedPayload> BlockDecoder::salvage() const {
    std::vector<SalvagedPayload> out;
    for (int slot = 0; slot < k_; ++slot) {
        const auto& p = pivots_[static_cast<std::size_t>(slot)];
        if (p && row_is_unit(slot))
            out.push_back({slot, unframe_payload(p->symbol)});
    }
    return out;
}

std::vector<std::vector<gf::Elem>> BlockDecoder::coefficient_rows() const {
    std::vector<std::vector<gf::Elem>> rows;
    rows.reserve(pivots_.size());
    for (const auto& p : pivots_) {
        if (p)
            rows.push_back(p->coeffs);
        else
            rows.emplace_back(static_cast<std::size_t>(k_), 0);
    }
    return rows;
}

} // namespace nc
