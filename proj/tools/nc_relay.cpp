#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nc/relay.hpp"
#include "tool_common.hpp"

// Transparent coding relay. `encode` wraps an application's datagram flow
// into systematic + coded symbols, `decode` unwraps on the far side,
// `passthrough` forwards unchanged (baseline). Flags can come from a
// key=value config file via --config; NC_* environment variables override
// built-in defaults.

int main(int argc, char** argv) {
    CLI::App app{"network-coding UDP relay"};
    app.set_config("--config", "", "key=value config file");

    std::string role;
    app.add_option("role", role, "encode | decode | passthrough")
        ->required()
        ->check(CLI::IsMember({"encode", "decode", "passthrough"}));

    nc::RelayConfig cfg;
    std::string peer;
    std::string consumer;
    std::string release = "burst";
    app.add_option("--app-port", cfg.app_port, "application-facing UDP port")
        ->envname("NC_APP_PORT")
        ->capture_default_str();
    app.add_option("--coded-port", cfg.coded_port, "coded-stream UDP port")
        ->envname("NC_CODED_PORT")
        ->capture_default_str();
    app.add_option("--peer", peer, "where encode/passthrough send (host:port)")
        ->envname("NC_PEER");
    app.add_option("--consumer", consumer, "where decode delivers (host:port)")
        ->envname("NC_CONSUMER");
    app.add_option("--k", cfg.coding.k, "source packets per block")->capture_default_str();
    app.add_option("--n", cfg.coding.n, "total symbols per block")->capture_default_str();
    app.add_option("--symbol-size", cfg.coding.symbol_size, "coded symbol size, octets")
        ->capture_default_str();
    app.add_option("--release", release, "burst | early")
        ->check(CLI::IsMember({"burst", "early"}))
        ->capture_default_str();
    app.add_option("--idle-timeout-ms", cfg.idle_timeout_ms, "partial-block flush/abandon timer")
        ->capture_default_str();
    app.add_option("--max-blocks", cfg.max_blocks_in_flight, "decoder block window")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "coefficient seed")->capture_default_str();
    app.add_option("--metrics-csv", cfg.metrics_csv, "write counters here on exit");

    CLI11_PARSE(app, argc, argv);

    cfg.release = release == "early" ? nc::ReleasePolicy::early : nc::ReleasePolicy::burst;
    if (peer.empty()) peer = "127.0.0.1:" + std::to_string(cfg.coded_port);
    if (consumer.empty()) consumer = "127.0.0.1:" + std::to_string(cfg.app_port);

    nctool::install_stop_handlers();
    try {
        cfg.peer = nc::SockAddr::parse(peer);
        cfg.consumer = nc::SockAddr::parse(consumer);
        if (role == "encode") {
            cfg.role = nc::RelayRole::encoder;
            nc::EncoderProxy proxy(cfg);
            std::cerr << "nc-relay encode: app " << proxy.app_addr().to_string() << " -> peer "
                      << cfg.peer.to_string() << "\n";
            proxy.run(nctool::g_stop);
        } else if (role == "decode") {
            cfg.role = nc::RelayRole::decoder;
            nc::DecoderProxy proxy(cfg);
            std::cerr << "nc-relay decode: coded " << proxy.coded_addr().to_string()
                      << " -> consumer " << cfg.consumer.to_string() << "\n";
            proxy.run(nctool::g_stop);
        } else {
            cfg.role = nc::RelayRole::passthrough;
            nc::PassthroughProxy proxy(cfg);
            std::cerr << "nc-relay passthrough: app " << proxy.app_addr().to_string()
                      << " -> peer " << cfg.peer.to_string() << "\n";
            proxy.run(nctool::g_stop);
        }
    } catch (const std::exception& ex) {
        std::cerr << "nc-relay: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
