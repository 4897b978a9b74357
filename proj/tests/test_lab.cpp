#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nc/kvconfig.hpp"
#include "nc/lab.hpp"
#include "nc/metrics.hpp"

namespace fs = std::filesystem;

using nc::CampaignConfig;
using nc::CampaignRow;
using nc::KvFile;
using nc::ScenarioKind;
using nc::ScenarioSpec;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir =
        fs::temp_directory_path() / ("nclab-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("kv config parsing") {
    SUBCASE("sections, comments, trimming, duplicate keys") {
        const auto file = nc::parse_kv_text(
            "# comment\n"
            "; alt comment\n"
            "[campaign]\n"
            "  rate_mbps = 10  \n"
            "payload=1200\n"
            "payload = 800\n"
            "\n"
            "[scenario base]\n"
            "kind = nc\n"
            "note = a=b\n");
        REQUIRE(file.sections.size() == 2);
        const auto* campaign = file.find("campaign");
        REQUIRE(campaign != nullptr);
        CHECK(campaign->get("rate_mbps") == "10");
        CHECK(campaign->get("payload") == "800");  // last duplicate wins
        CHECK(campaign->get("missing", "fallback") == "fallback");
        CHECK_FALSE(campaign->has("missing"));
        const auto* scenario = file.find("scenario base");
        REQUIRE(scenario != nullptr);
        CHECK(scenario->get("kind") == "nc");
        CHECK(scenario->get("note") == "a=b");  // '=' after the first is literal
        CHECK(file.find("nope") == nullptr);
    }
    SUBCASE("preamble keys land in the unnamed section") {
        const auto file = nc::parse_kv_text("stray = 1\n[s]\nk = 2\n");
        REQUIRE(file.sections.size() == 2);
        CHECK(file.sections[0].name == "");
        CHECK(file.sections[0].get("stray") == "1");
    }
    SUBCASE("errors carry line numbers") {
        CHECK_THROWS_WITH_AS(nc::parse_kv_text("a = 1\nbroken line\n"),
                             doctest::Contains("line 2"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_kv_text("[unclosed\n"),
                             doctest::Contains("line 1"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_kv_text("[]\n"), doctest::Contains("line 1"),
                             std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_kv_text("= v\n"), doctest::Contains("empty key"),
                             std::runtime_error);
    }
    SUBCASE("empty input parses to no sections") {
        CHECK(nc::parse_kv_text("").sections.empty());
        CHECK(nc::parse_kv_text("# only\n\n").sections.empty());
    }
}

TEST_CASE("default loss grid") {
    const auto grid = nc::default_loss_grid();
    REQUIRE(grid.size() == 10);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(0.45));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(grid[i] == doctest::Approx(0.05 * static_cast<double>(i)));
}

TEST_CASE("campaign spec parsing") {
    SUBCASE("defaults flow from [campaign] into scenarios") {
        const auto specs = nc::parse_campaign_spec(nc::parse_kv_text(
            "[campaign]\n"
            "rate_mbps = 4\n"
            "duration_s = 2\n"
            "payload = 600\n"
            "seed = 42\n"
            "grid = 0,0.1\n"
            "[scenario direct]\n"
            "kind = passthrough\n"
            "[scenario coded]\n"
            "kind = nc\n"
            "k = 10\n"
            "n = 15\n"
            "[scenario bound]\n"
            "kind = model\n"
            "model = ha-max\n"));
        REQUIRE(specs.size() == 3);
        CHECK(specs[0].kind == ScenarioKind::passthrough);
        CHECK(specs[0].rate_mbps == 4.0);
        CHECK(specs[0].duration_s == 2.0);
        CHECK(specs[0].seed == 42);
        REQUIRE(specs[0].loss_grid.size() == 2);
        CHECK(specs[0].loss_grid[1] == doctest::Approx(0.1));
        CHECK(specs[1].kind == ScenarioKind::nc);
        CHECK(specs[1].coding.k == 10);
        CHECK(specs[1].coding.n == 15);
        CHECK(specs[1].coding.symbol_size == 602);  // payload + length prefix
        CHECK(specs[1].code_rate_label() == "2/3");
        CHECK(specs[2].kind == ScenarioKind::model);
        CHECK(specs[2].model == nc::ModelForm::ha_max);
        CHECK(specs[2].code_rate_label() == "");
        CHECK(specs[0].code_rate_label() == "1");
    }
    SUBCASE("scenario keys override campaign defaults") {
        const auto specs = nc::parse_campaign_spec(nc::parse_kv_text(
            "[campaign]\n"
            "rate_mbps = 4\n"
            "[scenario coded]\n"
            "kind = nc\n"
            "k = 2\n"
            "n = 10\n"
            "rate_mbps = 1\n"
            "payload = 600\n"
            "symbol_size = 700\n"
            "release = early\n"
            "grid = default\n"));
        REQUIRE(specs.size() == 1);
        CHECK(specs[0].rate_mbps == 1.0);
        CHECK(specs[0].payload_size == 600);
        CHECK(specs[0].coding.symbol_size == 700);
        CHECK(specs[0].release == nc::ReleasePolicy::early);
        CHECK(specs[0].loss_grid.size() == 10);
        CHECK(specs[0].code_rate_label() == "1/5");
    }
    SUBCASE("rejections") {
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("stray = 1\n[scenario x]\nkind = passthrough\n")),
                             doctest::Contains("inside a section"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[campaign]\nbogus = 1\n[scenario x]\nkind = passthrough\n")),
                             doctest::Contains("unknown key"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nbogus = 1\n")),
                             doctest::Contains("unknown key"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[weird]\nk = 1\n")),
                             doctest::Contains("unknown section"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario a]\nkind = passthrough\n[scenario a]\nkind = passthrough\n")),
                             doctest::Contains("duplicate scenario"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = passthrough\nk = 4\n")),
                             doctest::Contains("only valid when kind = nc"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = nc\nmodel = ha-min\n")),
                             doctest::Contains("only valid when kind = model"),
                             std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[campaign]\nrate_mbps = 1\n")),
                             doctest::Contains("no scenarios"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = volleyball\n")),
                             doctest::Contains("unknown kind"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = nc\nsymbol_size = 64\n")),
                             doctest::Contains("symbol size too small"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = passthrough\ngrid = 0,1.0\n")),
                             doctest::Contains("out of [0,1)"), std::runtime_error);
        CHECK_THROWS_WITH_AS(nc::parse_campaign_spec(nc::parse_kv_text("[scenario x]\nkind = passthrough\nrate_mbps = banana\n")),
                             doctest::Contains("bad number"), std::runtime_error);
    }
}

TEST_CASE("scenario validation") {
    ScenarioSpec spec;
    spec.name = "ok";
    spec.loss_grid = {0.0};
    spec.validate();
    spec.name = "with,comma";
    CHECK_THROWS_AS(spec.validate(), std::runtime_error);
    spec.name = "ok";
    spec.loss_grid = {};
    CHECK_THROWS_AS(spec.validate(), std::runtime_error);
    spec.loss_grid = {0.0};
    spec.payload_size = 8;
    CHECK_THROWS_AS(spec.validate(), std::runtime_error);
}

TEST_CASE("comparison report") {
    SUBCASE("no coded rows") {
        std::vector<CampaignRow> rows(1);
        rows[0].scenario = "bound";
        rows[0].code_rate = "";
        CHECK(nc::compare_report(rows) == "no coded scenarios in campaign\n");
    }
    SUBCASE("bracket, advantage and the cheaper verdict") {
        std::vector<CampaignRow> rows;
        CampaignRow low;
        low.scenario = "coded";
        low.loss_rate = 0.1;
        low.code_rate = "2/3";
        low.delivered_loss = 0.001;
        rows.push_back(low);
        CampaignRow high = low;
        high.loss_rate = 0.2;
        high.delivered_loss = 0.034;
        rows.push_back(high);
        const std::string report = nc::compare_report(rows);
        // header names every column
        CHECK(report.find("loss_rate scenario code_rate nc_tx_per_source "
                          "harq_arq_bracket nc_advantage delivered_loss cheaper") !=
              std::string::npos);
        // r = 0.2: bracket [1.6, 5.3], advantage 4.24, NC (1.5 < 1.6)
        CHECK(report.find("0.2 coded 2/3 1.5 [1.6, 5.3] 4.24 0.034 NC") != std::string::npos);
        // r = 0.1: bracket [1.3, 3.15]; 1.5 >= 1.3 so retransmission wins
        CHECK(report.find("0.1 coded 2/3 1.5 [1.3, 3.15] 2.835 0.001 retx") !=
              std::string::npos);
    }
    SUBCASE("rows without measurements get a warning") {
        std::vector<CampaignRow> rows(1);
        rows[0].scenario = "coded";
        rows[0].loss_rate = 0.05;
        rows[0].code_rate = "2/3";
        const std::string report = nc::compare_report(rows);
        CHECK(report.find("warning: scenario coded r=0.05 has no measurements") !=
              std::string::npos);
        CHECK(report.find("n/a") != std::string::npos);
    }
}

TEST_CASE("model-only campaign runs offline and writes exact closed-form rows") {
    const fs::path out = fresh_dir("model");
    CampaignConfig config;
    config.out_dir = out.string();
    config.tools_dir = "/nonexistent-tools-dir";  // models never spawn processes
    ScenarioSpec lo;
    lo.name = "bound-min";
    lo.kind = ScenarioKind::model;
    lo.model = nc::ModelForm::ha_min;
    lo.loss_grid = {0.0, 0.2, 0.45};
    ScenarioSpec hi = lo;
    hi.name = "bound-max";
    hi.model = nc::ModelForm::ha_max;
    config.scenarios = {lo, hi};
    const auto rows = nc::run_campaign(config);
    REQUIRE(rows.size() == 6);
    for (const auto& row : rows) {
        REQUIRE(row.delivered_loss.has_value());
        CHECK(*row.delivered_loss == 0.0);
        CHECK_FALSE(row.throughput_mbps.has_value());
        REQUIRE(row.tx_per_source_packet.has_value());
    }
    CHECK(*rows[0].tx_per_source_packet == 1.0);                    // 1 + 3*0
    CHECK(*rows[1].tx_per_source_packet == doctest::Approx(1.6));   // 1 + 3*0.2
    CHECK(*rows[2].tx_per_source_packet == doctest::Approx(2.35));  // 1 + 3*0.45
    CHECK(*rows[3].tx_per_source_packet == 1.0);                    // 1 + 21.5*0
    CHECK(*rows[4].tx_per_source_packet == doctest::Approx(5.3));   // 1 + 21.5*0.2
    CHECK(*rows[5].tx_per_source_packet == doctest::Approx(10.675));
    // artifacts: the campaign table parses back, the report mentions no NC rows
    const auto parsed = nc::parse_csv(slurp(out / "campaign.csv"));
    CHECK(parsed.size() == 6);
    CHECK(slurp(out / "compare.txt") == "no coded scenarios in campaign\n");
    fs::remove_all(out);
}

TEST_CASE("live campaign over loopback pipes" * doctest::timeout(240)) {
    // needs the built tools; the test environment points NC_TOOLS_DIR at them
    REQUIRE(std::getenv("NC_TOOLS_DIR") != nullptr);

    const std::string spec_text =
        "[campaign]\n"
        "rate_mbps = 0.5\n"
        "duration_s = 1\n"
        "payload = 64\n"
        "seed = 7\n"
        "grid = 0,0.3\n"
        "[scenario coded]\n"
        "kind = nc\n"
        "k = 2\n"
        "n = 4\n"
        "[scenario bound-min]\n"
        "kind = model\n"
        "model = ha-min\n";

    auto run_once = [&](const std::string& tag) {
        CampaignConfig config;
        config.scenarios = nc::parse_campaign_spec(nc::parse_kv_text(spec_text));
        const fs::path out = fresh_dir("live-" + tag);
        config.out_dir = out.string();
        const auto rows = nc::run_campaign(config);
        return std::pair{rows, out};
    };

    const auto [rows, out] = run_once("a");
    REQUIRE(rows.size() == 4);

    // nc rows first (file order), then the model rows
    CHECK(rows[0].scenario == "coded");
    CHECK(rows[0].code_rate == "1/2");  // 2/4 reduced
    CHECK(rows[1].scenario == "coded");
    CHECK(rows[2].scenario == "bound-min");
    CHECK(rows[3].scenario == "bound-min");

    // lossless cell: nothing may be lost, and the relay cost is 1/CR = 2
    REQUIRE(rows[0].delivered_loss.has_value());
    CHECK(*rows[0].delivered_loss == doctest::Approx(0.0).epsilon(0.002));
    REQUIRE(rows[0].tx_per_source_packet.has_value());
    CHECK(*rows[0].tx_per_source_packet == doctest::Approx(2.0).epsilon(0.05));
    REQUIRE(rows[0].throughput_mbps.has_value());
    CHECK(*rows[0].throughput_mbps == doctest::Approx(0.5).epsilon(0.15));

    // lossy cell: some loss is plausible but the relay cost stays 1/CR
    REQUIRE(rows[1].delivered_loss.has_value());
    CHECK(*rows[1].delivered_loss < 0.2);  // far below the raw channel loss 0.3
    REQUIRE(rows[1].tx_per_source_packet.has_value());
    CHECK(*rows[1].tx_per_source_packet == doctest::Approx(2.0).epsilon(0.05));

    // model rows are exact
    CHECK(*rows[2].tx_per_source_packet == doctest::Approx(1.0));
    CHECK(*rows[3].tx_per_source_packet == doctest::Approx(1.9));

    // artifacts exist: per-run dirs with logs, campaign.csv, compare.txt
    CHECK(fs::exists(out / "campaign.csv"));
    CHECK(fs::exists(out / "compare.txt"));
    CHECK(fs::exists(out / "coded" / "r0" / "sender.csv"));
    CHECK(fs::exists(out / "coded" / "r0.3" / "sink.csv"));
    const auto parsed = nc::parse_csv(slurp(out / "campaign.csv"));
    REQUIRE(parsed.size() == 4);
    CHECK(parsed[0].scenario == "coded");

    // compare report exists and carries the bracket for the lossy cell
    const std::string report = slurp(out / "compare.txt");
    CHECK(report.find("[1.9, 7.45]") != std::string::npos);  // r = 0.3 bracket

    // determinism: a second run reproduces the deterministic columns
    const auto [again, out2] = run_once("b");
    REQUIRE(again.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(again[i].scenario == rows[i].scenario);
        CHECK(again[i].loss_rate == rows[i].loss_rate);
        CHECK(again[i].code_rate == rows[i].code_rate);
    }
    CHECK(*again[0].delivered_loss == doctest::Approx(0.0).epsilon(0.002));
    // the channel drop pattern is seeded: losses agree closely across runs
    REQUIRE(again[1].delivered_loss.has_value());
    CHECK(std::abs(*again[1].delivered_loss - *rows[1].delivered_loss) < 0.02);
    fs::remove_all(out);
    fs::remove_all(out2);
}
