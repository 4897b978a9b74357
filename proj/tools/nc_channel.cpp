#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nc/channel.hpp"
#include "tool_common.hpp"

// Seeded lossy UDP hop: forwards datagrams from --listen to --forward,
// dropping a deterministic pseudo-random fraction and optionally adding
// delay/jitter. The same seed always drops the same packet indices.

int main(int argc, char** argv) {
    CLI::App app{"deterministic lossy UDP channel"};

    nc::ChannelConfig cfg;
    std::uint16_t listen_port = 0;
    std::string forward;
    std::string metrics_csv;
    app.add_option("--listen", listen_port, "ingress UDP port")->required();
    app.add_option("--forward", forward, "egress host:port")->required();
    app.add_option("--loss-rate", cfg.loss_rate, "drop probability in [0,1]")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "drop/jitter seed")->capture_default_str();
    app.add_option("--delay-ms", cfg.delay_ms, "fixed forwarding delay")->capture_default_str();
    app.add_option("--jitter-ms", cfg.jitter_ms, "uniform extra delay bound")
        ->capture_default_str();
    app.add_option("--metrics-csv", metrics_csv, "write counters here on exit");

    CLI11_PARSE(app, argc, argv);
    nctool::install_stop_handlers();

    try {
        cfg.validate();
        nc::ChannelRelay relay(cfg, nc::SockAddr::any(listen_port), nc::SockAddr::parse(forward));
        std::cerr << "nc-channel: " << relay.ingress_addr().to_string() << " -> " << forward
                  << " loss " << cfg.loss_rate << "\n";
        relay.run(nctool::g_stop);
        const nc::ChannelCounterSnapshot c = relay.counters();
        std::cout << "seen " << c.seen << ", dropped " << c.dropped << ", forwarded "
                  << c.forwarded << "\n";
        if (!metrics_csv.empty()) relay.write_counters_csv(metrics_csv);
    } catch (const std::exception& ex) {
        std::cerr << "nc-channel: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
