#include "nc/traffic.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "nc/rng.hpp"

namespace nc {
namespace {

constexpr std::uint64_t kFillerSeed = 0x7261666669636Bull;

void put_u64be(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
}

std::uint64_t get_u64be(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
    return v;
}

} // namespace

std::uint64_t fnv_fold_datagram(std::uint64_t h, std::span<const std::uint8_t> datagram) {
    h = fnv_step(h, static_cast<std::uint8_t>(datagram.size() >> 8));
    h = fnv_step(h, static_cast<std::uint8_t>(datagram.size() & 0xFF));
    for (std::uint8_t byte : datagram) h = fnv_step(h, byte);
    return h;
}

void TrafficConfig::validate() const {
    if (rate_bps <= 0) throw std::invalid_argument("rate must be positive");
    if (payload_size < kTrafficHeaderSize)
        throw std::invalid_argument("payload must hold seq and timestamp");
    if (payload_size > 65507) throw std::invalid_argument("payload exceeds UDP limit");
    if (duration_s < 0) throw std::invalid_argument("duration must be non-negative");
}

double TrafficConfig::interval_us() const {
    return static_cast<double>(payload_size) * 8e6 / rate_bps;
}

std::uint64_t TrafficConfig::planned_packets() const {
    validate();
    if (duration_s <= 0) return 0;
    const double duration_us = duration_s * 1e6;
    return static_cast<std::uint64_t>(std::floor((duration_us - 1e-6) / interval_us())) + 1;
}

std::vector<std::uint8_t> build_payload(std::uint64_t seq, std::uint64_t send_ts_us,
                                        std::size_t size) {
    if (size < kTrafficHeaderSize) throw std::invalid_argument("payload too small");
    std::vector<std::uint8_t> payload(size);
    put_u64be(payload.data(), seq);
    put_u64be(payload.data() + 8, send_ts_us);
    Splitmix64 filler(derive_seed(kFillerSeed, seq));
    for (std::size_t i = kTrafficHeaderSize; i < size; ++i) payload[i] = filler.next_byte();
    return payload;
}

std::optional<ParsedPayload> parse_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < kTrafficHeaderSize) return std::nullopt;
    ParsedPayload parsed;
    parsed.seq = get_u64be(payload.data());
    parsed.send_ts_us = get_u64be(payload.data() + 8);
    Splitmix64 filler(derive_seed(kFillerSeed, parsed.seq));
    parsed.filler_ok = true;
    for (std::size_t i = kTrafficHeaderSize; i < payload.size(); ++i) {
        if (payload[i] != filler.next_byte()) {
            parsed.filler_ok = false;
            break;
        }
    }
    return parsed;
}

SendReport traffic_send(const TrafficConfig& cfg, const SockAddr& dest,
                        const std::atomic<bool>& stop) {
    cfg.validate();
    UdpSocket sock = UdpSocket::create();
    sock.set_buffer_sizes(1 << 22);
    SendReport report;
    const std::uint64_t total = cfg.planned_packets();
    const double interval = cfg.interval_us();
    const std::int64_t start_us = monotonic_us();
    for (std::uint64_t i = 0; i < total && !stop.load(std::memory_order_relaxed); ++i) {
        const auto deadline =
            start_us + static_cast<std::int64_t>(std::llround(interval * static_cast<double>(i)));
        sleep_until_us(deadline);
        const auto payload =
            build_payload(i, static_cast<std::uint64_t>(monotonic_us()), cfg.payload_size);
        sock.send_to(dest, payload);
        report.stream_hash = fnv_fold_datagram(report.stream_hash, payload);
        ++report.packets_sent;
        report.bytes_sent += payload.size();
    }
    report.elapsed_s = static_cast<double>(monotonic_us() - start_us) / 1e6;
    report.achieved_bps = report.elapsed_s > 0
                              ? static_cast<double>(report.bytes_sent) * 8.0 / report.elapsed_s
                              : 0.0;
    return report;
}

TrafficSink::TrafficSink(const SinkConfig& cfg)
    : cfg_(cfg), sock_(UdpSocket::bind(SockAddr::any(cfg.listen_port))) {
    sock_.set_buffer_sizes(1 << 22);
}

SinkReport TrafficSink::run(const std::atomic<bool>& stop) {
    SinkReport report;
    JitterEstimator jitter;
    LossTracker tracker;
    std::uint64_t unique_bytes = 0;
    std::uint64_t duplicates_ignored = 0;
    std::uint64_t reordered = 0;
    std::uint64_t corrupted = 0;
    std::uint64_t prev_arrival_seq = 0;
    bool have_prev = false;
    std::int64_t first_rx_us = 0;
    std::int64_t last_rx_us = 0;
    const std::int64_t started_us = monotonic_us();
    const std::int64_t idle_us = std::int64_t{cfg_.idle_exit_ms} * 1000;
    while (!stop.load(std::memory_order_relaxed)) {
        const std::int64_t now_before = monotonic_us();
        if (cfg_.max_wait_s > 0 &&
            static_cast<double>(now_before - started_us) >= cfg_.max_wait_s * 1e6)
            break;
        if (report.received_any && now_before - last_rx_us >= idle_us) break;
        auto datagram = sock_.recv(20);
        if (!datagram) continue;
        const std::int64_t now = monotonic_us();
        if (!report.received_any) first_rx_us = now;
        report.received_any = true;
        last_rx_us = now;
        report.stream_hash = fnv_fold_datagram(report.stream_hash, *datagram);
        const auto parsed = parse_payload(*datagram);
        if (!parsed) {
            ++corrupted;
            continue;
        }
        if (have_prev && parsed->seq < prev_arrival_seq) ++reordered;
        prev_arrival_seq = parsed->seq;
        have_prev = true;
        if (!tracker.add(parsed->seq)) {
            ++duplicates_ignored;
            continue;
        }
        if (!parsed->filler_ok) ++corrupted;
        unique_bytes += datagram->size();
        jitter.update(parsed->send_ts_us, static_cast<std::uint64_t>(now));
        report.max_seq_seen = std::max(report.max_seq_seen, parsed->seq);
    }
    report.metrics.bytes_delivered = unique_bytes;
    report.metrics.packets_delivered = tracker.unique();
    report.metrics.packets_lost = tracker.lost();
    report.metrics.duplicates = duplicates_ignored;
    report.metrics.reordered = reordered;
    report.metrics.corrupted = corrupted;
    report.metrics.jitter_ms = jitter.jitter_ms();
    report.metrics.window_s =
        report.received_any ? static_cast<double>(last_rx_us - first_rx_us) / 1e6 : 0.0;
    return report;
}

void write_sink_csv(const std::string& path, const SinkReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sink csv: " + path);
    const FlowMetrics& m = report.metrics;
    out << "metric,value\n";
    out << "packets_delivered," << m.packets_delivered << '\n';
    out << "packets_lost," << m.packets_lost << '\n';
    out << "bytes_delivered," << m.bytes_delivered << '\n';
    out << "duplicates," << m.duplicates << '\n';
    out << "reordered," << m.reordered << '\n';
    out << "corrupted," << m.corrupted << '\n';
    out << "window_s," << format_sig6(m.window_s) << '\n';
    out << "throughput_mbps," << format_sig6(m.throughput_bps() / 1e6) << '\n';
    out << "jitter_ms," << format_sig6(m.jitter_ms) << '\n';
    out << "delivered_loss," << format_sig6(m.loss_fraction()) << '\n';
    out << "stream_hash," << report.stream_hash << '\n';
}

} // namespace nc
