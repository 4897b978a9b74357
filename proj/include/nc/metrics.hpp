#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Flow measurement: throughput, sequence-gap loss and the smoothed
// interarrival jitter estimator media tools report (J += (|D|-J)/16 with
// D the interarrival-vs-intersend spacing delta). Timestamps are in
// microseconds; jitter is reported in milliseconds.

namespace nc {

class JitterEstimator {
public:
    // Feed one (send, receive) timestamp pair in arrival order; returns the
    // updated estimate in microseconds. The first packet initializes J = 0.
    double update(std::uint64_t send_us, std::uint64_t recv_us);

    double jitter_us() const { return jitter_us_; }
    double jitter_ms() const { return jitter_us_ / 1000.0; }

private:
    bool have_prev_ = false;
    std::uint64_t prev_send_us_ = 0;
    std::uint64_t prev_recv_us_ = 0;
    double jitter_us_ = 0.0;
};

class LossTracker {
public:
    // Returns true when the sequence number is new; duplicates count once.
    bool add(std::uint64_t seq);

    std::uint64_t unique() const { return unique_; }
    std::uint64_t duplicates() const { return duplicates_; }
    std::uint64_t max_seq() const { return any_ ? max_seq_ : 0; }
    bool empty() const { return !any_; }

    // Cumulative loss by gap accounting: (max_seq + 1) - delivered.
    std::uint64_t lost() const;

private:
    bool any_ = false;
    std::uint64_t max_seq_ = 0;
    std::uint64_t unique_ = 0;
    std::uint64_t duplicates_ = 0;
    std::vector<bool> seen_;
};

struct FlowMetrics {
    std::uint64_t bytes_delivered = 0;
    std::uint64_t packets_delivered = 0;  // unique sequences
    std::uint64_t packets_lost = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t reordered = 0;
    std::uint64_t corrupted = 0;
    double jitter_ms = 0.0;
    double window_s = 0.0;  // first-to-last arrival span

    double throughput_bps() const {
        return window_s > 0 ? 8.0 * static_cast<double>(bytes_delivered) / window_s : 0.0;
    }
    double loss_fraction() const {
        const double total = static_cast<double>(packets_delivered + packets_lost);
        return total > 0 ? static_cast<double>(packets_lost) / total : 0.0;
    }
};

// One row of the campaign table.
struct CampaignRow {
    std::string scenario;
    double loss_rate = 0.0;
    std::string code_rate;                  // exact rational text, e.g. "2/3"
    std::optional<double> throughput_mbps;
    std::optional<double> jitter_ms;
    std::optional<double> delivered_loss;
    std::optional<double> tx_per_source_packet;
};

inline constexpr const char* kCampaignCsvHeader =
    "scenario,loss_rate,code_rate,throughput_mbps,jitter_ms,delivered_loss,"
    "tx_per_source_packet";

// 6 significant digits, empty cell for absent values; header always present.
std::string emit_csv(std::span<const CampaignRow> rows);

std::string format_sig6(double v);

// Parses text produced by emit_csv (header + rows). Throws
// std::runtime_error on malformed input.
std::vector<CampaignRow> parse_csv(const std::string& text);

} // namespace nc
