#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nc/traffic.hpp"
#include "tool_common.hpp"

// Constant-rate UDP test traffic: `send` paces sequence-stamped datagrams
// at a target bit rate, `sink` measures what arrives (throughput, loss,
// jitter, stream digest) and leaves once the flow goes idle.

namespace {

void write_send_csv(const std::string& path, const nc::SendReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "metric,value\n";
    out << "packets_sent," << report.packets_sent << '\n';
    out << "bytes_sent," << report.bytes_sent << '\n';
    out << "elapsed_s," << nc::format_sig6(report.elapsed_s) << '\n';
    out << "achieved_bps," << nc::format_sig6(report.achieved_bps) << '\n';
    out << "stream_hash," << report.stream_hash << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UDP test traffic generator and sink"};
    app.require_subcommand(1);

    CLI::App* send = app.add_subcommand("send", "pace datagrams at a target rate");
    nc::TrafficConfig traffic;
    std::string dest;
    std::string send_csv;
    send->add_option("--rate", traffic.rate_bps, "target rate, bits/s")->capture_default_str();
    send->add_option("--size", traffic.payload_size, "payload size, octets")
        ->capture_default_str();
    send->add_option("--duration", traffic.duration_s, "send window, seconds")
        ->capture_default_str();
    send->add_option("--dest", dest, "destination host:port")->required();
    send->add_option("--csv", send_csv, "write the send report here");

    CLI::App* sink = app.add_subcommand("sink", "measure an incoming flow");
    nc::SinkConfig sink_cfg;
    std::string sink_csv;
    sink->add_option("--listen", sink_cfg.listen_port, "UDP port (0 = ephemeral)")
        ->capture_default_str();
    sink->add_option("--csv", sink_csv, "write the flow report here");
    sink->add_option("--idle-exit-ms", sink_cfg.idle_exit_ms, "leave after this much silence")
        ->capture_default_str();
    sink->add_option("--max-wait-s", sink_cfg.max_wait_s, "hard time cap (0 = none)")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    nctool::install_stop_handlers();

    try {
        if (send->parsed()) {
            const nc::SockAddr to = nc::SockAddr::parse(dest);
            const nc::SendReport report = nc::traffic_send(traffic, to, nctool::g_stop);
            std::cout << "sent " << report.packets_sent << " packets, " << report.bytes_sent
                      << " bytes in " << nc::format_sig6(report.elapsed_s) << " s ("
                      << nc::format_sig6(report.achieved_bps / 1e6) << " Mbit/s), hash "
                      << report.stream_hash << "\n";
            if (!send_csv.empty()) write_send_csv(send_csv, report);
        } else {
            nc::TrafficSink snk(sink_cfg);
            std::cerr << "nc-traffic sink: listening on " << snk.local_addr().to_string()
                      << "\n";
            const nc::SinkReport report = snk.run(nctool::g_stop);
            const nc::FlowMetrics& m = report.metrics;
            std::cout << "delivered " << m.packets_delivered << " packets ("
                      << nc::format_sig6(m.throughput_bps() / 1e6) << " Mbit/s), lost "
                      << m.packets_lost << ", dup " << m.duplicates << ", reordered "
                      << m.reordered << ", corrupted " << m.corrupted << ", jitter "
                      << nc::format_sig6(m.jitter_ms) << " ms, hash " << report.stream_hash
                      << "\n";
            if (!sink_csv.empty()) nc::write_sink_csv(sink_csv, report);
        }
    } catch (const std::exception& ex) {
        std::cerr << "nc-traffic: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
