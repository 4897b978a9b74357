// Acceptance gate: every release-blocking behaviour of the stack verified
// end to end, one pass/fail line per criterion. Run with no arguments for
// the full gate or with criterion numbers to run a subset.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nc/block_codec.hpp"
#include "nc/channel.hpp"
#include "nc/gf256.hpp"
#include "nc/relay.hpp"
#include "nc/reliability.hpp"
#include "nc/traffic.hpp"
#include "nc/wire_format.hpp"

using nc::Rational;

namespace {

void note(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    std::printf("  ");
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

// --- loopback pipelines ----------------------------------------------------

struct PipeReport {
    nc::SendReport send;
    nc::SinkReport sink;

    double delivered_loss() const {
        if (send.packets_sent == 0) return 0.0;
        const double sent = static_cast<double>(send.packets_sent);
        const double got = static_cast<double>(sink.metrics.packets_delivered);
        return std::max(0.0, 1.0 - got / sent);
    }
};

nc::SendReport send_traffic(double rate_bps, std::size_t payload, double duration_s,
                            const nc::SockAddr& dest) {
    nc::TrafficConfig cfg;
    cfg.rate_bps = rate_bps;
    cfg.payload_size = payload;
    cfg.duration_s = duration_s;
    std::atomic<bool> never{false};
    return nc::traffic_send(cfg, dest, never);
}

nc::SinkConfig sink_config(double duration_s) {
    nc::SinkConfig cfg;
    cfg.idle_exit_ms = 1500;
    cfg.max_wait_s = duration_s + 60.0;
    return cfg;
}

// generator -> encoder proxy -> lossy channel -> decoder proxy -> sink
PipeReport run_nc_pipeline(int k, int n, double loss_rate, double rate_bps,
                           std::size_t payload, double duration_s, std::uint64_t seed) {
    nc::TrafficSink sink(sink_config(duration_s));

    nc::RelayConfig dec_cfg;
    dec_cfg.role = nc::RelayRole::decoder;
    dec_cfg.app_port = 0;
    dec_cfg.coded_port = 0;
    dec_cfg.consumer = sink.local_addr();
    dec_cfg.coding = nc::CodingParams{k, n, static_cast<int>(payload + 2)};
    dec_cfg.release = nc::ReleasePolicy::burst;
    nc::DecoderProxy decoder(dec_cfg);

    nc::ChannelConfig chan_cfg;
    chan_cfg.loss_rate = loss_rate;
    chan_cfg.seed = seed;
    nc::ChannelRelay channel(chan_cfg, nc::SockAddr::loopback(0), decoder.coded_addr());

    nc::RelayConfig enc_cfg;
    enc_cfg.role = nc::RelayRole::encoder;
    enc_cfg.app_port = 0;
    enc_cfg.coded_port = 0;
    enc_cfg.peer = channel.ingress_addr();
    enc_cfg.coding = dec_cfg.coding;
    enc_cfg.seed = seed + 1;
    nc::EncoderProxy encoder(enc_cfg);

    std::atomic<bool> stop_sink{false};
    std::atomic<bool> stop_decoder{false};
    std::atomic<bool> stop_channel{false};
    std::atomic<bool> stop_encoder{false};
    PipeReport report;
    std::thread sink_thread([&] { report.sink = sink.run(stop_sink); });
    std::thread decoder_thread([&] { decoder.run(stop_decoder); });
    std::thread channel_thread([&] { channel.run(stop_channel); });
    std::thread encoder_thread([&] { encoder.run(stop_encoder); });

    report.send = send_traffic(rate_bps, payload, duration_s, encoder.app_addr());

    // let the encoder idle-flush and the channel drain, then force the
    // decoder to hand over everything it still holds
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    stop_decoder = true;
    decoder_thread.join();
    sink_thread.join();  // exits on its own idle timeout
    stop_channel = true;
    stop_encoder = true;
    channel_thread.join();
    encoder_thread.join();
    return report;
}

PipeReport run_passthrough_pipeline(double rate_bps, std::size_t payload,
                                    double duration_s) {
    nc::TrafficSink sink(sink_config(duration_s));

    nc::RelayConfig cfg;
    cfg.role = nc::RelayRole::passthrough;
    cfg.app_port = 0;
    cfg.coded_port = 0;
    cfg.peer = sink.local_addr();
    nc::PassthroughProxy proxy(cfg);

    std::atomic<bool> stop_sink{false};
    std::atomic<bool> stop_proxy{false};
    PipeReport report;
    std::thread sink_thread([&] { report.sink = sink.run(stop_sink); });
    std::thread proxy_thread([&] { proxy.run(stop_proxy); });

    report.send = send_traffic(rate_bps, payload, duration_s, proxy.app_addr());

    sink_thread.join();
    stop_proxy = true;
    proxy_thread.join();
    return report;
}

PipeReport run_direct(double rate_bps, std::size_t payload, double duration_s) {
    nc::TrafficSink sink(sink_config(duration_s));
    std::atomic<bool> stop_sink{false};
    PipeReport report;
    std::thread sink_thread([&] { report.sink = sink.run(stop_sink); });
    report.send = send_traffic(rate_bps, payload, duration_s, sink.local_addr());
    sink_thread.join();
    return report;
}

// --- GF(2^8) rank oracle -----------------------------------------------------

int matrix_rank(std::vector<std::vector<nc::gf::Elem>> rows) {
    if (rows.empty()) return 0;
    const std::size_t cols = rows[0].size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows.size(); ++col) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank]);
        const nc::gf::Elem inv = nc::gf::inv(rows[rank][col]);
        for (auto& v : rows[rank]) v = nc::gf::mul(v, inv);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            const nc::gf::Elem factor = rows[r][col];
            for (std::size_t c = 0; c < cols; ++c)
                rows[r][c] = nc::gf::add(rows[r][c], nc::gf::mul(factor, rows[rank][c]));
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

// --- criteria ----------------------------------------------------------------

bool criterion_closed_forms() {
    const Rational r5(1, 5);
    const Rational r10(1, 10);
    bool ok = true;
    ok &= nc::p_ha_min(r5) == Rational(8, 5);
    ok &= nc::p_ha_max(r5) == Rational(53, 10);
    ok &= nc::p_nc(Rational(2, 3)) == Rational(3, 2);
    ok &= nc::p_nc_capacity(r5) == Rational(5, 4);
    ok &= nc::nc_advantage(r5) == Rational(106, 25);
    ok &= std::fabs(nc::to_double(nc::nc_advantage(r5)) - 4.24) <= 0.005;
    ok &= nc::p_ha_min(r10) == Rational(13, 10);
    ok &= nc::p_ha_max(r10) == Rational(63, 20);
    ok &= nc::p_nc_capacity(r10) == Rational(10, 9);
    ok &= std::fabs(nc::to_double(nc::p_nc_capacity(r10)) - 1.11) <= 0.005;
    note("r=0.2: ha in [%.6g, %.6g], nc 1.5, capacity %.6g, advantage %.6g",
         nc::to_double(nc::p_ha_min(r5)), nc::to_double(nc::p_ha_max(r5)),
         nc::to_double(nc::p_nc_capacity(r5)), nc::to_double(nc::nc_advantage(r5)));
    return ok;
}

bool criterion_bracket_dominance() {
    bool ok = true;
    for (int i = 0; i <= 666; ++i) {
        const Rational r(i, 1000);
        const Rational capacity = nc::p_nc_capacity(r);
        const Rational cheapest = nc::p_ha_min(r);
        if (i == 0) {
            ok &= capacity == cheapest;
        } else {
            ok &= capacity < cheapest;
        }
    }
    const Rational edge(2, 3);
    ok &= nc::p_nc_capacity(edge) == nc::p_ha_min(edge);
    ok &= nc::p_nc_capacity(edge) == Rational(3);
    note("1/(1-r) <= 1+3r held on all 668 grid points, equality at r=0 and r=2/3");
    return ok;
}

bool criterion_codec_properties() {
    std::mt19937_64 rng(20260813);
    const int trials = 10000;
    int singular = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 16);
        const int n = k + static_cast<int>(rng() % static_cast<std::uint64_t>(33 - k));
        const int symbol_size = 3 + static_cast<int>(rng() % 1200);

        nc::BlockEncoder encoder(nc::CodingParams{k, n, symbol_size});
        std::vector<std::vector<std::uint8_t>> payloads(k);
        std::vector<nc::CodedSymbol> symbols;
        for (int s = 0; s < k; ++s) {
            payloads[s].resize(rng() % static_cast<std::uint64_t>(symbol_size - 1));
            for (auto& b : payloads[s]) b = static_cast<std::uint8_t>(rng());
            symbols.push_back(encoder.push(payloads[s]));
        }
        for (auto& coded : encoder.flush(rng())) symbols.push_back(std::move(coded));

        // erase exactly n-k of the n transmitted symbols
        std::vector<int> order(symbols.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(static_cast<std::size_t>(k));

        std::vector<std::vector<nc::gf::Elem>> received_rows;
        nc::BlockDecoder decoder(symbols[0].block_id, k, symbol_size);
        for (int idx : order) {
            received_rows.push_back(symbols[static_cast<std::size_t>(idx)].coefficient_row());
            decoder.insert(symbols[static_cast<std::size_t>(idx)]);
        }

        const int oracle_rank = matrix_rank(received_rows);
        if (decoder.rank() != oracle_rank) {
            note("trial %d: decoder rank %d disagrees with oracle %d", trial,
                 decoder.rank(), oracle_rank);
            return false;
        }
        if (oracle_rank < k) {
            ++singular;
            continue;
        }
        if (!decoder.decodable()) {
            note("trial %d: nonsingular matrix not decodable", trial);
            return false;
        }
        const auto released = decoder.release();  // unframed, slot order
        for (int s = 0; s < k; ++s) {
            if (released[static_cast<std::size_t>(s)] != payloads[static_cast<std::size_t>(s)]) {
                note("trial %d: slot %d payload mismatch", trial, s);
                return false;
            }
        }
    }
    const double fraction = static_cast<double>(singular) / trials;
    note("%d/%d received matrices singular (%.4f%%, limit 1%%)", singular, trials,
         100.0 * fraction);
    return fraction < 0.01;
}

bool criterion_loss_recovery() {
    const auto low = run_nc_pipeline(10, 15, 0.10, 10e6, 1200, 30.0, 41001);
    const double low_loss = low.delivered_loss();
    note("r=0.10: sent %llu delivered %llu loss %.5f (limit <= 0.01)",
         static_cast<unsigned long long>(low.send.packets_sent),
         static_cast<unsigned long long>(low.sink.metrics.packets_delivered), low_loss);

    const auto high = run_nc_pipeline(10, 15, 0.40, 10e6, 1200, 30.0, 41002);
    const double high_loss = high.delivered_loss();
    note("r=0.40: sent %llu delivered %llu loss %.5f (limit >= 0.05)",
         static_cast<unsigned long long>(high.send.packets_sent),
         static_cast<unsigned long long>(high.sink.metrics.packets_delivered), high_loss);

    return low.send.packets_sent > 0 && low_loss <= 0.01 && high_loss >= 0.05;
}

bool criterion_deep_redundancy() {
    const auto run = run_nc_pipeline(10, 50, 0.45, 10e6, 1200, 30.0, 41003);
    const double loss = run.delivered_loss();
    note("r=0.45 at code rate 1/5: sent %llu delivered %llu loss %.5f (limit <= 0.005)",
         static_cast<unsigned long long>(run.send.packets_sent),
         static_cast<unsigned long long>(run.sink.metrics.packets_delivered), loss);
    return run.send.packets_sent > 0 && loss <= 0.005;
}

bool criterion_jitter_shape() {
    const double rate = 10e6;
    const std::size_t payload = 1200;
    const double duration = 12.0;
    const auto calm = run_nc_pipeline(10, 50, 0.05, rate, payload, duration, 41004);
    const auto rough = run_nc_pipeline(10, 50, 0.25, rate, payload, duration, 41005);
    const auto base = run_passthrough_pipeline(rate, payload, duration);
    const double j_calm = calm.sink.metrics.jitter_ms;
    const double j_rough = rough.sink.metrics.jitter_ms;
    const double j_base = base.sink.metrics.jitter_ms;
    const double spread =
        std::fabs(j_calm - j_rough) / std::max({j_calm, j_rough, 1e-12});
    note("jitter: r=0.05 %.3f ms, r=0.25 %.3f ms (relative gap %.3f, limit < 0.25)",
         j_calm, j_rough, spread);
    note("passthrough baseline %.3f ms; coded/baseline ratios %.1fx / %.1fx (limit >= 3)",
         j_base, j_calm / std::max(j_base, 1e-12), j_rough / std::max(j_base, 1e-12));
    return j_calm > 0 && j_rough > 0 && spread < 0.25 && j_calm >= 3.0 * j_base &&
           j_rough >= 3.0 * j_base;
}

bool criterion_monte_carlo() {
    const std::uint64_t trials = 1000000;
    const auto lo = nc::mc_harq_arq_cost(nc::RetxParams{}, 0.2, trials, 52001,
                                         nc::McMode::endpoint_min);
    const auto hi = nc::mc_harq_arq_cost(nc::RetxParams{}, 0.2, trials, 52002,
                                         nc::McMode::endpoint_max);
    const double lo_gap = std::fabs(lo.mean - 1.6);
    const double hi_gap = std::fabs(hi.mean - 5.3);
    note("min mode: mean %.5f (target 1.6, gap %.5f, 3se %.5f)", lo.mean, lo_gap,
         3.0 * lo.std_error);
    note("max mode: mean %.5f (target 5.3, gap %.5f, 3se %.5f)", hi.mean, hi_gap,
         3.0 * hi.std_error);
    return lo.std_error > 0 && hi.std_error > 0 && lo_gap <= 3.0 * lo.std_error &&
           hi_gap <= 3.0 * hi.std_error;
}

bool criterion_transparency() {
    const double rate = 10e6;
    const std::size_t payload = 1200;
    const double duration = 15.0;

    const auto direct = run_direct(rate, payload, duration);
    const double direct_bps = direct.sink.metrics.throughput_bps();
    const auto relayed = run_passthrough_pipeline(rate, payload, duration);
    const double relayed_bps = relayed.sink.metrics.throughput_bps();
    const double gap = std::fabs(relayed_bps - direct_bps) / direct_bps;
    note("direct %.0f bps, passthrough %.0f bps (gap %.4f, limit 0.05), lost %llu",
         direct_bps, relayed_bps, gap,
         static_cast<unsigned long long>(relayed.sink.metrics.packets_lost));

    const auto coded = run_nc_pipeline(10, 15, 0.0, rate, payload, duration, 41006);
    const bool identical = coded.sink.stream_hash == coded.send.stream_hash &&
                           coded.sink.metrics.packets_delivered == coded.send.packets_sent &&
                           coded.sink.metrics.packets_lost == 0 &&
                           coded.sink.metrics.corrupted == 0;
    note("lossless coded stream: sent %llu delivered %llu hashes %s",
         static_cast<unsigned long long>(coded.send.packets_sent),
         static_cast<unsigned long long>(coded.sink.metrics.packets_delivered),
         identical ? "equal" : "DIFFER");

    return direct.send.packets_sent > 0 && relayed.sink.metrics.packets_lost == 0 &&
           relayed.sink.metrics.duplicates == 0 && gap <= 0.05 && identical;
}

bool criterion_wire_fuzz() {
    std::mt19937_64 rng(90001);
    const int random_trials = 1000000;
    int accepted = 0;
    std::vector<std::uint8_t> blob;
    for (int trial = 0; trial < random_trials; ++trial) {
        blob.resize(rng() % 64);
        for (auto& b : blob) b = static_cast<std::uint8_t>(rng());
        if (trial % 2 == 0 && blob.size() >= 3) {
            blob[0] = nc::wire::kMagic0;  // bias half toward plausible headers
            blob[1] = nc::wire::kMagic1;
            blob[2] = nc::wire::kVersion;
        }
        if (trial % 8 == 1 && blob.size() >= 15) {
            // a consistent-geometry slice so the accept path sees raw bytes
            blob[0] = nc::wire::kMagic0;
            blob[1] = nc::wire::kMagic1;
            blob[2] = nc::wire::kVersion;
            blob[3] = 0;  // systematic slot 0
            blob[8] = static_cast<std::uint8_t>(1 + rng() % 255);
            blob[9] = 0xFF;
            const std::size_t body = blob.size() - nc::wire::kHeaderSize;
            blob[10] = static_cast<std::uint8_t>(body >> 8);
            blob[11] = static_cast<std::uint8_t>(body & 0xFF);
        }
        const auto result = nc::wire::parse(blob);
        if (!result.ok()) continue;
        ++accepted;
        if (nc::wire::serialize(result.symbol) != blob) {
            note("trial %d: accepted datagram did not re-serialize identically", trial);
            return false;
        }
    }

    const int valid_trials = 100000;
    for (int trial = 0; trial < valid_trials; ++trial) {
        nc::CodedSymbol sym;
        sym.block_id = static_cast<std::uint32_t>(rng());
        sym.k = static_cast<std::uint8_t>(1 + rng() % 255);
        sym.n = static_cast<std::uint8_t>(sym.k + rng() % (256 - sym.k));
        sym.symbol_size = static_cast<std::uint16_t>(3 + rng() % 1500);
        sym.symbol.resize(sym.symbol_size);
        for (auto& b : sym.symbol) b = static_cast<std::uint8_t>(rng());
        if (rng() % 2 == 0) {
            sym.kind = nc::SymbolKind::coded;
            sym.slot = nc::wire::kCodedMarker;
            sym.coefficients.resize(sym.k);
            for (auto& c : sym.coefficients) c = static_cast<nc::gf::Elem>(rng());
        } else {
            sym.kind = nc::SymbolKind::systematic;
            sym.slot = static_cast<std::uint8_t>(rng() % sym.k);
        }
        const auto result = nc::wire::parse(nc::wire::serialize(sym));
        if (!result.ok() || !(result.symbol == sym)) {
            note("trial %d: parse(serialize(s)) != s", trial);
            return false;
        }
    }
    note("%d random datagrams parsed without crash (%d accepted), %d identity round trips",
         random_trials, accepted, valid_trials);
    return accepted > 0;
}

struct Criterion {
    int id;
    const char* what;
    bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "closed-form transmission costs at r=0.2 and r=0.1", criterion_closed_forms},
    {2, "capacity cost never exceeds cheapest retransmission cost on [0, 2/3]",
     criterion_bracket_dominance},
    {3, "randomized block codec recovers byte-identical payloads", criterion_codec_properties},
    {4, "pipeline delivered loss: <=1% at r=0.10, >=5% at r=0.40 (K=10, N=15)",
     criterion_loss_recovery},
    {5, "code rate 1/5 holds delivered loss <=0.5% at r=0.45", criterion_deep_redundancy},
    {6, "burst-release jitter stable across loss rates, above passthrough baseline",
     criterion_jitter_shape},
    {7, "Monte Carlo endpoint modes converge to closed forms at r=0.2",
     criterion_monte_carlo},
    {8, "passthrough transparency and byte-identical lossless coded delivery",
     criterion_transparency},
    {9, "wire-format fuzz: crash-free parsing and serialize/parse identity",
     criterion_wire_fuzz},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    bool all_ok = true;
    for (const Criterion& criterion : kCriteria) {
        if (!wanted.empty() && wanted.count(criterion.id) == 0) continue;
        bool ok = false;
        try {
            ok = criterion.run();
        } catch (const std::exception& ex) {
            note("exception: %s", ex.what());
        }
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.what);
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
