#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nc/metrics.hpp"
#include "nc/reliability.hpp"

// Transmission-cost models for reliability schemes: exact closed forms
// (rational arithmetic) or Monte Carlo simulation of the retransmission
// process at its cheap/expensive endpoints.

int main(int argc, char** argv) {
    CLI::App app{"reliability transmission-cost models"};

    std::string r_text;
    std::string cr_text = "2/3";
    std::string mode = "closed";
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 1;
    std::string csv;
    app.add_option("--r", r_text, "loss rate, decimal or fraction")->required();
    app.add_option("--cr", cr_text, "code rate K/N")->capture_default_str();
    app.add_option("--mode", mode, "closed | mc-min | mc-max | mc-uniform")
        ->check(CLI::IsMember({"closed", "mc-min", "mc-max", "mc-uniform"}))
        ->capture_default_str();
    app.add_option("--trials", trials, "Monte Carlo trials")->capture_default_str();
    app.add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();
    app.add_option("--csv", csv, "write results here");

    CLI11_PARSE(app, argc, argv);

    try {
        const nc::Rational r = nc::parse_rational(r_text);
        const nc::Rational cr = nc::parse_rational(cr_text);
        std::vector<std::pair<std::string, std::string>> rows;
        auto add = [&rows](const std::string& name, const std::string& value) {
            rows.emplace_back(name, value);
        };
        if (mode == "closed") {
            const nc::Rational lo = nc::p_ha_min(r);
            const nc::Rational hi = nc::p_ha_max(r);
            const nc::Rational pnc = nc::p_nc(cr);
            const nc::Rational cap = nc::p_nc_capacity(r);
            const nc::Rational adv = nc::nc_advantage(r);
            add("p_ha_min", nc::format_sig6(nc::to_double(lo)) + " (" + nc::to_string(lo) + ")");
            add("p_ha_max", nc::format_sig6(nc::to_double(hi)) + " (" + nc::to_string(hi) + ")");
            add("p_nc", nc::format_sig6(nc::to_double(pnc)) + " (" + nc::to_string(pnc) + ")");
            add("p_nc_capacity",
                nc::format_sig6(nc::to_double(cap)) + " (" + nc::to_string(cap) + ")");
            add("nc_advantage",
                nc::format_sig6(nc::to_double(adv)) + " (" + nc::to_string(adv) + ")");
        } else {
            nc::McMode mc_mode = nc::McMode::endpoint_min;
            if (mode == "mc-max") mc_mode = nc::McMode::endpoint_max;
            if (mode == "mc-uniform") mc_mode = nc::McMode::uniform;
            const nc::McResult got = nc::mc_harq_arq_cost(nc::RetxParams{}, nc::to_double(r),
                                                          trials, seed, mc_mode);
            add("mean_tx_per_packet", nc::format_sig6(got.mean));
            add("std_error", nc::format_sig6(got.std_error));
            add("trials", std::to_string(got.trials));
        }
        for (const auto& [name, value] : rows) std::cout << name << " = " << value << "\n";
        if (!csv.empty()) {
            std::ofstream out(csv);
            if (!out) throw std::runtime_error("cannot write csv: " + csv);
            out << "metric,value\n";
            for (const auto& [name, value] : rows) {
                const auto paren = value.find(" (");
                out << name << ',' << (paren == std::string::npos ? value : value.substr(0, paren))
                    << '\n';
            }
        }
    } catch (const std::exception& ex) {
        std::cerr << "nc-model: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
