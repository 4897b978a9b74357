#include "nc/channel.hpp"

#include <fstream>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "nc/rng.hpp"

namespace nc {

void ChannelConfig::validate() const {
    if (loss_rate < 0.0 || loss_rate > 1.0)
        throw std::invalid_argument("channel: loss rate outside [0,1]");
    if (delay_ms < 0.0 || jitter_ms < 0.0)
        throw std::invalid_argument("channel: negative delay");
}

bool channel_admit(const ChannelConfig& cfg, std::uint64_t packet_index) {
    if (cfg.loss_rate <= 0.0)
        return true;
    if (cfg.loss_rate >= 1.0)
        return false;
    return u64_to_unit(splitmix64_at(cfg.seed, packet_index)) >= cfg.loss_rate;
}

namespace {

struct Pending {
    std::uint64_t due_us;
    std::uint64_t seq;  // FIFO tie-break so zero jitter never reorders
    std::vector<std::uint8_t> datagram;

    bool operator>(const Pending& other) const {
        return std::tie(due_us, seq) > std::tie(other.due_us, other.seq);
    }
};

} // namespace

ChannelRelay::ChannelRelay(ChannelConfig cfg, const SockAddr& ingress, const SockAddr& egress)
    : cfg_(cfg), ingress_(UdpSocket::bind(ingress)), egress_(egress) {
    cfg_.validate();
    ingress_.set_buffer_sizes(4 << 20);
}

void ChannelRelay::run(const std::atomic<bool>& stop) {
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> delayed;
    std::uint64_t index = 0;
    const bool has_delay = cfg_.delay_ms > 0.0 || cfg_.jitter_ms > 0.0;

    while (true) {
        // Flush whatever is due before the next wait.
        const std::uint64_t now = monotonic_us();
        while (!delayed.empty() && delayed.top().due_us <= now) {
            ingress_.send_to(egress_, delayed.top().datagram);
            forwarded_.fetch_add(1, std::memory_order_relaxed);
            delayed.pop();
        }

        int timeout_ms = 20;
        if (!delayed.empty()) {
            const std::uint64_t wait_us = delayed.top().due_us - now;
            timeout_ms = static_cast<int>(std::min<std::uint64_t>(wait_us / 1000 + 1, 20));
        }
        if (stop.load(std::memory_order_relaxed)) {
            // Drain pending delayed datagrams, then leave.
            while (!delayed.empty()) {
                sleep_until_us(delayed.top().due_us);
                ingress_.send_to(egress_, delayed.top().datagram);
                forwarded_.fetch_add(1, std::memory_order_relaxed);
                delayed.pop();
            }
            return;
        }

        auto datagram = ingress_.recv(timeout_ms);
        if (!datagram)
            continue;
        seen_.fetch_add(1, std::memory_order_relaxed);
        const std::uint64_t this_index = index++;
        if (!channel_admit(cfg_, this_index)) {
            dropped_.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        if (!has_delay) {
            ingress_.send_to(egress_, *datagram);
            forwarded_.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        double delay_ms = cfg_.delay_ms;
        if (cfg_.jitter_ms > 0.0) {
            // deterministic jitter draw from the same counter stream
            const double u = u64_to_unit(splitmix64_at(cfg_.seed ^ 0x6A09E667F3BCC908ull,
                                                       this_index));
            delay_ms += (2.0 * u - 1.0) * cfg_.jitter_ms;
            if (delay_ms < 0.0)
                delay_ms = 0.0;
        }
        Pending p;
        p.due_us = monotonic_us() + static_cast<std::uint64_t>(delay_ms * 1000.0);
        p.seq = this_index;
        p.datagram = std::move(*datagram);
        delayed.push(std::move(p));
    }
}

ChannelCounterSnapshot ChannelRelay::counters() const {
    ChannelCounterSnapshot s;
    s.seen = seen_.load(std::memory_order_relaxed);
    s.dropped = dropped_.load(std::memory_order_relaxed);
    s.forwarded = forwarded_.load(std::memory_order_relaxed);
    return s;
}

void ChannelRelay::write_counters_csv(const std::string& path) const {
    const auto s = counters();
    std::ofstream out(path);
    out << "counter,value\n";
    out << "seen," << s.seen << "\n";
    out << "dropped," << s.dropped << "\n";
    out << "forwarded," << s.forwarded << "\n";
}

} // namespace nc
