#include "nc/relay.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "nc/rng.hpp"
#include "nc/wire_format.hpp"

namespace nc {
namespace {

void write_counter_rows(const std::string& path,
                        const std::vector<std::pair<std::string, std::uint64_t>>& rows) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write counters: " + path);
    out << "counter,value\n";
    for (const auto& [name, value] : rows) out << name << ',' << value << '\n';
}

} // namespace

void RelayConfig::validate() const {
    coding.validate();
    if (role != RelayRole::decoder && app_port == coded_port && app_port != 0)
        throw std::invalid_argument("app and coded port collide");
    if (idle_timeout_ms <= 0) throw std::invalid_argument("idle timeout must be positive");
    if (max_blocks_in_flight < 1) throw std::invalid_argument("block window must be >= 1");
}

// --- encoder -------------------------------------------------------------

EncoderProxy::EncoderProxy(RelayConfig cfg)
    : cfg_(std::move(cfg)),
      in_(UdpSocket::bind(SockAddr::any(cfg_.app_port))),
      encoder_(cfg_.coding) {
    cfg_.validate();
    in_.set_buffer_sizes(1 << 22);
}

void EncoderProxy::flush_block(bool partial) {
    const std::uint64_t block_seed = derive_seed(cfg_.seed, encoder_.block_id());
    for (const CodedSymbol& sym : encoder_.flush(block_seed)) {
        in_.send_to(cfg_.peer, wire::serialize(sym));
        coded_sent_.fetch_add(1, std::memory_order_relaxed);
    }
    blocks_flushed_.fetch_add(1, std::memory_order_relaxed);
    if (partial) partial_flushes_.fetch_add(1, std::memory_order_relaxed);
}

void EncoderProxy::run(const std::atomic<bool>& stop) {
    const std::int64_t idle_us = std::int64_t{cfg_.idle_timeout_ms} * 1000;
    std::int64_t last_rx_us = monotonic_us();
    while (!stop.load(std::memory_order_relaxed)) {
        int timeout_ms = 20;
        if (encoder_.buffered() > 0) {
            const std::int64_t remaining_us = idle_us - (monotonic_us() - last_rx_us);
            if (remaining_us <= 0) {
                flush_block(true);
                continue;
            }
            timeout_ms = static_cast<int>(std::min<std::int64_t>(20, remaining_us / 1000 + 1));
        }
        auto datagram = in_.recv(timeout_ms);
        if (!datagram) continue;
        last_rx_us = monotonic_us();
        datagrams_in_.fetch_add(1, std::memory_order_relaxed);
        if (datagram->size() > static_cast<std::size_t>(cfg_.coding.max_payload())) {
            oversize_dropped_.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        const CodedSymbol sym = encoder_.push(*datagram);
        in_.send_to(cfg_.peer, wire::serialize(sym));
        systematic_sent_.fetch_add(1, std::memory_order_relaxed);
        if (encoder_.full()) flush_block(false);
    }
    if (encoder_.buffered() > 0) flush_block(true);
    if (!cfg_.metrics_csv.empty()) write_counters_csv(cfg_.metrics_csv);
}

EncoderCounterSnapshot EncoderProxy::counters() const {
    EncoderCounterSnapshot snap;
    snap.datagrams_in = datagrams_in_.load();
    snap.oversize_dropped = oversize_dropped_.load();
    snap.systematic_sent = systematic_sent_.load();
    snap.coded_sent = coded_sent_.load();
    snap.blocks_flushed = blocks_flushed_.load();
    snap.partial_flushes = partial_flushes_.load();
    return snap;
}

void EncoderProxy::write_counters_csv(const std::string& path) const {
    const EncoderCounterSnapshot c = counters();
    write_counter_rows(path, {{"datagrams_in", c.datagrams_in},
                              {"oversize_dropped", c.oversize_dropped},
                              {"systematic_sent", c.systematic_sent},
                              {"coded_sent", c.coded_sent},
                              {"blocks_flushed", c.blocks_flushed},
                              {"partial_flushes", c.partial_flushes}});
}

// --- decoder -------------------------------------------------------------

DecoderProxy::DecoderProxy(RelayConfig cfg)
    : cfg_(std::move(cfg)), in_(UdpSocket::bind(SockAddr::any(cfg_.coded_port))) {
    cfg_.validate();
    in_.set_buffer_sizes(1 << 22);
}

void DecoderProxy::forward_slot(BlockEntry& entry, int slot,
                                std::span<const std::uint8_t> payload, bool salvaged) {
    if (entry.forwarded[static_cast<std::size_t>(slot)]) return;
    in_.send_to(cfg_.consumer, payload);
    entry.forwarded[static_cast<std::size_t>(slot)] = true;
    ++entry.forwarded_count;
    payloads_delivered_.fetch_add(1, std::memory_order_relaxed);
    if (salvaged) payloads_salvaged_.fetch_add(1, std::memory_order_relaxed);
}

void DecoderProxy::release_front(BlockEntry& entry) {
    const auto payloads = entry.decoder.release();
    for (int slot = 0; slot < entry.decoder.k(); ++slot)
        forward_slot(entry, slot, payloads[static_cast<std::size_t>(slot)], false);
    blocks_released_.fetch_add(1, std::memory_order_relaxed);
}

void DecoderProxy::salvage_front(BlockEntry& entry) {
    for (const BlockDecoder::SalvagedPayload& got : entry.decoder.salvage())
        forward_slot(entry, got.slot, got.payload, true);
    slots_lost_.fetch_add(
        static_cast<std::uint64_t>(entry.decoder.k() - entry.forwarded_count),
        std::memory_order_relaxed);
    blocks_salvaged_.fetch_add(1, std::memory_order_relaxed);
}

void DecoderProxy::progress(bool drain_all) {
    while (!active_.empty()) {
        auto it = active_.begin();
        BlockEntry& entry = it->second;
        const std::uint32_t id = it->first;
        if (entry.decoder.decodable()) {
            release_front(entry);
        } else {
            const bool superseded = max_block_seen_ >= id + 2;
            const bool overflow =
                active_.size() > static_cast<std::size_t>(cfg_.max_blocks_in_flight);
            if (!(drain_all || superseded || overflow)) break;
            salvage_front(entry);
        }
        have_delivery_floor_ = true;
        delivery_floor_ = id + 1;
        active_.erase(it);
    }
}

void DecoderProxy::handle_datagram(std::span<const std::uint8_t> datagram) {
    datagrams_in_.fetch_add(1, std::memory_order_relaxed);
    const wire::ParseResult parsed = wire::parse(datagram);
    if (!parsed.ok()) {
        malformed_.fetch_add(1, std::memory_order_relaxed);
        return;
    }
    const CodedSymbol& sym = parsed.symbol;
    if (have_delivery_floor_ && sym.block_id < delivery_floor_) {
        stale_.fetch_add(1, std::memory_order_relaxed);
        return;
    }
    auto it = active_.find(sym.block_id);
    if (it == active_.end()) {
        BlockEntry entry{BlockDecoder(sym.block_id, sym.k, sym.symbol_size),
                         std::vector<bool>(sym.k, false), 0};
        it = active_.emplace(sym.block_id, std::move(entry)).first;
    }
    BlockEntry& entry = it->second;
    int delta = 0;
    try {
        delta = entry.decoder.insert(sym);
    } catch (const std::invalid_argument&) {
        malformed_.fetch_add(1, std::memory_order_relaxed);
        return;
    }
    if (delta == 1)
        innovative_.fetch_add(1, std::memory_order_relaxed);
    else
        dependent_.fetch_add(1, std::memory_order_relaxed);
    if (cfg_.release == ReleasePolicy::early && sym.kind == SymbolKind::systematic &&
        sym.slot < entry.decoder.k()) {
        forward_slot(entry, sym.slot, unframe_payload(sym.symbol), false);
    }
    max_block_seen_ = std::max(max_block_seen_, sym.block_id);
}

void DecoderProxy::run(const std::atomic<bool>& stop) {
    const std::int64_t idle_us = std::int64_t{cfg_.idle_timeout_ms} * 1000;
    std::int64_t last_rx_us = monotonic_us();
    while (!stop.load(std::memory_order_relaxed)) {
        auto datagram = in_.recv(20);
        if (datagram) {
            last_rx_us = monotonic_us();
            handle_datagram(*datagram);
            progress(false);
        } else if (!active_.empty() && monotonic_us() - last_rx_us >= idle_us) {
            progress(true);
        }
    }
    progress(true);
    if (!cfg_.metrics_csv.empty()) write_counters_csv(cfg_.metrics_csv);
}

DecoderCounterSnapshot DecoderProxy::counters() const {
    DecoderCounterSnapshot snap;
    snap.datagrams_in = datagrams_in_.load();
    snap.malformed = malformed_.load();
    snap.stale = stale_.load();
    snap.dependent = dependent_.load();
    snap.innovative = innovative_.load();
    snap.blocks_released = blocks_released_.load();
    snap.blocks_salvaged = blocks_salvaged_.load();
    snap.payloads_delivered = payloads_delivered_.load();
    snap.payloads_salvaged = payloads_salvaged_.load();
    snap.slots_lost = slots_lost_.load();
    return snap;
}

void DecoderProxy::write_counters_csv(const std::string& path) const {
    const DecoderCounterSnapshot c = counters();
    write_counter_rows(path, {{"datagrams_in", c.datagrams_in},
                              {"malformed", c.malformed},
                              {"stale", c.stale},
                              {"dependent", c.dependent},
                              {"innovative", c.innovative},
                              {"blocks_released", c.blocks_released},
                              {"blocks_salvaged", c.blocks_salvaged},
                              {"payloads_delivered", c.payloads_delivered},
                              {"payloads_salvaged", c.payloads_salvaged},
                              {"slots_lost", c.slots_lost}});
}

// --- passthrough ---------------------------------------------------------

PassthroughProxy::PassthroughProxy(RelayConfig cfg)
    : cfg_(std::move(cfg)), in_(UdpSocket::bind(SockAddr::any(cfg_.app_port))) {
    cfg_.validate();
    in_.set_buffer_sizes(1 << 22);
}

void PassthroughProxy::run(const std::atomic<bool>& stop) {
    while (!stop.load(std::memory_order_relaxed)) {
        auto datagram = in_.recv(20);
        if (!datagram) continue;
        datagrams_in_.fetch_add(1, std::memory_order_relaxed);
        in_.send_to(cfg_.peer, *datagram);
        forwarded_.fetch_add(1, std::memory_order_relaxed);
    }
    if (!cfg_.metrics_csv.empty()) write_counters_csv(cfg_.metrics_csv);
}

PassthroughCounterSnapshot PassthroughProxy::counters() const {
    PassthroughCounterSnapshot snap;
    snap.datagrams_in = datagrams_in_.load();
    snap.forwarded = forwarded_.load();
    return snap;
}

void PassthroughProxy::write_counters_csv(const std::string& path) const {
    const PassthroughCounterSnapshot c = counters();
    write_counter_rows(path, {{"datagrams_in", c.datagrams_in}, {"forwarded", c.forwarded}});
}

} // namespace nc
