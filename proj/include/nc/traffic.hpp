#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nc/metrics.hpp"
#include "nc/udp.hpp"

// Constant-rate UDP test traffic. Every payload carries a sequence number
// and a send timestamp so the sink can measure loss, duplication,
// reordering and interarrival jitter without a side channel; the rest of
// the payload is deterministic filler so corruption is detectable. Both
// ends keep a running FNV-1a digest of the datagram stream (lengths
// included) so byte-identical delivery can be asserted end to end.

namespace nc {

inline constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001B3ull;
inline constexpr std::size_t kTrafficHeaderSize = 16;  // seq + send timestamp

constexpr std::uint64_t fnv_step(std::uint64_t h, std::uint8_t byte) {
    return (h ^ byte) * kFnvPrime;
}

std::uint64_t fnv_fold_datagram(std::uint64_t h, std::span<const std::uint8_t> datagram);

struct TrafficConfig {
    double rate_bps = 10e6;
    std::size_t payload_size = 1200;  // >= 16
    double duration_s = 10.0;

    void validate() const;
    double interval_us() const;
    // How many datagrams a run emits: sends at t = i * interval for every
    // i with t strictly inside [0, duration).
    std::uint64_t planned_packets() const;
};

// Payload layout: [seq u64 BE][send_ts_us u64 BE][deterministic filler].
std::vector<std::uint8_t> build_payload(std::uint64_t seq, std::uint64_t send_ts_us,
                                        std::size_t size);

struct ParsedPayload {
    std::uint64_t seq = 0;
    std::uint64_t send_ts_us = 0;
    bool filler_ok = false;
};

// Empty when the payload is too short to carry the header.
std::optional<ParsedPayload> parse_payload(std::span<const std::uint8_t> payload);

struct SendReport {
    std::uint64_t packets_sent = 0;
    std::uint64_t bytes_sent = 0;
    double elapsed_s = 0.0;
    double achieved_bps = 0.0;
    std::uint64_t stream_hash = kFnvOffset;
};

SendReport traffic_send(const TrafficConfig& cfg, const SockAddr& dest,
                        const std::atomic<bool>& stop);

struct SinkConfig {
    std::uint16_t listen_port = 0;  // 0 = ephemeral
    int idle_exit_ms = 1000;        // leave this long after the last datagram
    double max_wait_s = 0.0;        // overall cap; 0 = none
};

struct SinkReport {
    FlowMetrics metrics;
    std::uint64_t stream_hash = kFnvOffset;
    std::uint64_t max_seq_seen = 0;
    bool received_any = false;
};

class TrafficSink {
public:
    explicit TrafficSink(const SinkConfig& cfg);

    SockAddr local_addr() const { return sock_.local_addr(); }
    SinkReport run(const std::atomic<bool>& stop);

private:
    SinkConfig cfg_;
    UdpSocket sock_;
};

// "metric,value" rows, one per line, for downstream tooling.
void write_sink_csv(const std::string& path, const SinkReport& report);

} // namespace nc
