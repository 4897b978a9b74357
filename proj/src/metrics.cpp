#include "nc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace nc {

double JitterEstimator::update(std::uint64_t send_us, std::uint64_t recv_us) {
    if (have_prev_) {
        const double recv_gap = static_cast<double>(recv_us) - static_cast<double>(prev_recv_us_);
        const double send_gap = static_cast<double>(send_us) - static_cast<double>(prev_send_us_);
        const double d = recv_gap - send_gap;
        jitter_us_ += (std::abs(d) - jitter_us_) / 16.0;
    }
    have_prev_ = true;
    prev_send_us_ = send_us;
    prev_recv_us_ = recv_us;
    return jitter_us_;
}

bool LossTracker::add(std::uint64_t seq) {
    if (seq >= seen_.size())
        seen_.resize(static_cast<std::size_t>(seq) + 1, false);
    if (seen_[static_cast<std::size_t>(seq)]) {
        ++duplicates_;
        return false;
    }
    seen_[static_cast<std::size_t>(seq)] = true;
    ++unique_;
    if (!any_ || seq > max_seq_)
        max_seq_ = seq;
    any_ = true;
    return true;
}

std::uint64_t LossTracker::lost() const {
    if (!any_)
        return 0;
    return max_seq_ + 1 - unique_;
}

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

void append_cell(std::string& out, const std::optional<double>& v) {
    out += ',';
    if (v)
        out += format_sig6(*v);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_cell(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    return std::stod(s);
}

} // namespace

std::string emit_csv(std::span<const CampaignRow> rows) {
    std::string out = kCampaignCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.scenario;
        out += ',';
        out += format_sig6(r.loss_rate);
        out += ',';
        out += r.code_rate;
        append_cell(out, r.throughput_mbps);
        append_cell(out, r.jitter_ms);
        append_cell(out, r.delivered_loss);
        append_cell(out, r.tx_per_source_packet);
        out += '\n';
    }
    return out;
}

std::vector<CampaignRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCampaignCsvHeader)
        throw std::runtime_error("csv: missing or unexpected header");
    std::vector<CampaignRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_fields(line);
        if (f.size() != 7)
            throw std::runtime_error("csv: expected 7 columns, got row '" + line + "'");
        CampaignRow r;
        r.scenario = f[0];
        r.loss_rate = std::stod(f[1]);
        r.code_rate = f[2];
        r.throughput_mbps = parse_cell(f[3]);
        r.jitter_ms = parse_cell(f[4]);
        r.delivered_loss = parse_cell(f[5]);
        r.tx_per_source_packet = parse_cell(f[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace nc
