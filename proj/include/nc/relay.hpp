#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nc/block_codec.hpp"
#include "nc/udp.hpp"

// The proxy pair that makes coding invisible to the application. The
// encoder proxy captures datagrams on the app port, forwards each at once
// as a systematic symbol and follows every full (or idle-flushed) block
// with a burst of coded symbols. The decoder proxy rebuilds blocks from
// the coded port and hands recovered datagrams, in order, to a consumer
// address. A passthrough role forwards unmodified, as the no-correction
// baseline.

namespace nc {

enum class RelayRole { encoder, decoder, passthrough };
enum class ReleasePolicy { burst, early };

struct RelayConfig {
    RelayRole role = RelayRole::encoder;
    std::uint16_t app_port = 5201;    // application-facing port
    std::uint16_t coded_port = 5202;  // coded-stream port
    SockAddr peer;                     // encoder/passthrough output address
    SockAddr consumer;                 // decoder output address
    CodingParams coding;
    ReleasePolicy release = ReleasePolicy::burst;
    int idle_timeout_ms = 50;          // block idle flush / abandon interval
    int max_blocks_in_flight = 8;      // decoder window before force-salvage
    std::uint64_t seed = 1;            // coefficient generator base seed
    std::string metrics_csv;           // counters written here on shutdown

    void validate() const;
};

struct EncoderCounterSnapshot {
    std::uint64_t datagrams_in = 0;
    std::uint64_t oversize_dropped = 0;
    std::uint64_t systematic_sent = 0;
    std::uint64_t coded_sent = 0;
    std::uint64_t blocks_flushed = 0;
    std::uint64_t partial_flushes = 0;
};

class EncoderProxy {
public:
    explicit EncoderProxy(RelayConfig cfg);

    void run(const std::atomic<bool>& stop);

    SockAddr app_addr() const { return in_.local_addr(); }
    EncoderCounterSnapshot counters() const;
    void write_counters_csv(const std::string& path) const;

private:
    void flush_block(bool partial);

    RelayConfig cfg_;
    UdpSocket in_;
    BlockEncoder encoder_;
    std::atomic<std::uint64_t> datagrams_in_{0};
    std::atomic<std::uint64_t> oversize_dropped_{0};
    std::atomic<std::uint64_t> systematic_sent_{0};
    std::atomic<std::uint64_t> coded_sent_{0};
    std::atomic<std::uint64_t> blocks_flushed_{0};
    std::atomic<std::uint64_t> partial_flushes_{0};
};

struct DecoderCounterSnapshot {
    std::uint64_t datagrams_in = 0;
    std::uint64_t malformed = 0;
    std::uint64_t stale = 0;
    std::uint64_t dependent = 0;
    std::uint64_t innovative = 0;
    std::uint64_t blocks_released = 0;
    std::uint64_t blocks_salvaged = 0;
    std::uint64_t payloads_delivered = 0;  // all datagrams handed to the consumer
    std::uint64_t payloads_salvaged = 0;   // subset delivered from abandoned blocks
    std::uint64_t slots_lost = 0;
};

class DecoderProxy {
public:
    explicit DecoderProxy(RelayConfig cfg);

    void run(const std::atomic<bool>& stop);

    SockAddr coded_addr() const { return in_.local_addr(); }
    DecoderCounterSnapshot counters() const;
    void write_counters_csv(const std::string& path) const;

private:
    struct BlockEntry {
        BlockDecoder decoder;
        std::vector<bool> forwarded;  // per-slot, for early release
        int forwarded_count = 0;
    };

    void handle_datagram(std::span<const std::uint8_t> datagram);
    void forward_slot(BlockEntry& entry, int slot, std::span<const std::uint8_t> payload,
                      bool salvaged);
    void release_front(BlockEntry& entry);
    void salvage_front(BlockEntry& entry);
    // Delivers every block that is complete or must be abandoned, oldest
    // first; blocks only ever leave in block-id order.
    void progress(bool drain_all);

    RelayConfig cfg_;
    UdpSocket in_;
    std::map<std::uint32_t, BlockEntry> active_;
    bool have_delivery_floor_ = false;
    std::uint32_t delivery_floor_ = 0;  // ids below this are stale
    std::uint32_t max_block_seen_ = 0;
    std::atomic<std::uint64_t> datagrams_in_{0};
    std::atomic<std::uint64_t> malformed_{0};
    std::atomic<std::uint64_t> stale_{0};
    std::atomic<std::uint64_t> dependent_{0};
    std::atomic<std::uint64_t> innovative_{0};
    std::atomic<std::uint64_t> blocks_released_{0};
    std::atomic<std::uint64_t> blocks_salvaged_{0};
    std::atomic<std::uint64_t> payloads_delivered_{0};
    std::atomic<std::uint64_t> payloads_salvaged_{0};
    std::atomic<std::uint64_t> slots_lost_{0};
};

struct PassthroughCounterSnapshot {
    std::uint64_t datagrams_in = 0;
    std::uint64_t forwarded = 0;
};

class PassthroughProxy {
public:
    explicit PassthroughProxy(RelayConfig cfg);

    void run(const std::atomic<bool>& stop);

    SockAddr app_addr() const { return in_.local_addr(); }
    PassthroughCounterSnapshot counters() const;
    void write_counters_csv(const std::string& path) const;

private:
    RelayConfig cfg_;
    UdpSocket in_;
    std::atomic<std::uint64_t> datagrams_in_{0};
    std::atomic<std::uint64_t> forwarded_{0};
};

} // namespace nc
