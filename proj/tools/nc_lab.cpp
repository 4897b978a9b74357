#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nc/lab.hpp"

// Experiment runner: sweeps scenario x loss-rate cells from a spec file,
// each cell a fresh five-process loopback pipeline, and writes
// campaign.csv plus a comparison against the retransmission cost models.

int main(int argc, char** argv) {
    CLI::App app{"network-coding experiment campaigns"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "execute a campaign spec");
    std::string spec_path;
    std::string out_dir;
    std::string tools_dir;
    run->add_option("--spec", spec_path, "campaign spec file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--tools-dir", tools_dir, "directory holding nc-relay/nc-channel/nc-traffic");

    CLI11_PARSE(app, argc, argv);

    try {
        nc::CampaignConfig config;
        config.scenarios = nc::parse_campaign_spec(nc::parse_kv_file(spec_path));
        config.out_dir = out_dir;
        config.tools_dir = tools_dir;
        std::size_t cells = 0;
        for (const nc::ScenarioSpec& spec : config.scenarios) cells += spec.loss_grid.size();
        std::cerr << "nc-lab: " << config.scenarios.size() << " scenarios, " << cells
                  << " cells\n";
        const auto rows = nc::run_campaign(config);
        std::size_t failed = 0;
        for (const nc::CampaignRow& row : rows)
            if (!row.delivered_loss && !row.throughput_mbps && !row.tx_per_source_packet)
                ++failed;
        std::cout << nc::compare_report(rows);
        std::cout << "campaign: " << rows.size() << " rows -> " << out_dir << "/campaign.csv";
        if (failed > 0) std::cout << " (" << failed << " failed)";
        std::cout << "\n";
        return failed == rows.size() ? 1 : 0;
    } catch (const std::exception& ex) {
        std::cerr << "nc-lab: " << ex.what() << "\n";
        return 1;
    }
}
