#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "nc/udp.hpp"

// Seeded i.i.d. erasure channel for UDP datagrams, standing in for a
// degrading radio link. Drop verdicts are a pure function of
// (seed, packet index), so a run is reproducible regardless of timing,
// and the emulator can optionally add a fixed one-way delay with uniform
// jitter around it.

namespace nc {

struct ChannelConfig {
    double loss_rate = 0.0;   // r in [0,1]
    std::uint64_t seed = 0;
    double delay_ms = 0.0;    // fixed one-way delay
    double jitter_ms = 0.0;   // uniform +/- around delay_ms

    void validate() const;    // throws std::invalid_argument
};

// Bernoulli(1-r) keep verdict for the index-th datagram.
bool channel_admit(const ChannelConfig& cfg, std::uint64_t packet_index);

struct ChannelCounterSnapshot {
    std::uint64_t seen = 0;
    std::uint64_t dropped = 0;
    std::uint64_t forwarded = 0;
};

class ChannelRelay {
public:
    // Binds the ingress address; every admitted datagram is forwarded to
    // egress after the configured delay.
    ChannelRelay(ChannelConfig cfg, const SockAddr& ingress, const SockAddr& egress);

    // Event loop; returns when `stop` becomes true (pending delayed
    // datagrams are flushed first).
    void run(const std::atomic<bool>& stop);

    SockAddr ingress_addr() const { return ingress_.local_addr(); }
    ChannelCounterSnapshot counters() const;
    void write_counters_csv(const std::string& path) const;

private:
    ChannelConfig cfg_;
    UdpSocket ingress_;
    SockAddr egress_;
    std::atomic<std::uint64_t> seen_{0};
    std::atomic<std::uint64_t> dropped_{0};
    std::atomic<std::uint64_t> forwarded_{0};
};

} // namespace nc
