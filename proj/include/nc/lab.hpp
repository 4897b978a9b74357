#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nc/block_codec.hpp"
#include "nc/kvconfig.hpp"
#include "nc/metrics.hpp"
#include "nc/relay.hpp"

// Campaign orchestration: runs generator -> encoder proxy -> lossy channel
// -> decoder proxy -> sink as separate processes on loopback for every
// scenario x loss-rate cell, harvests their per-run CSVs and folds them
// into one campaign table. Retransmission-scheme rows come from the
// closed-form cost models rather than live runs.

namespace nc {

enum class ScenarioKind { passthrough, nc, model };
enum class ModelForm { ha_min, ha_max };

struct ScenarioSpec {
    std::string name;
    ScenarioKind kind = ScenarioKind::passthrough;
    CodingParams coding;                       // nc only
    ReleasePolicy release = ReleasePolicy::burst;  // nc only
    ModelForm model = ModelForm::ha_min;       // model only
    std::vector<double> loss_grid;             // non-empty, each in [0, 1)
    double rate_mbps = 10.0;
    std::size_t payload_size = 1200;
    double duration_s = 3.0;
    std::uint64_t seed = 1;
    double channel_delay_ms = 0.0;
    double channel_jitter_ms = 0.0;

    void validate() const;
    // "2/3"-style reduced fraction for nc, "1" for passthrough, "" for model.
    std::string code_rate_label() const;
};

// r in 0.05 steps over [0, 0.45].
std::vector<double> default_loss_grid();

// Reads [campaign] defaults plus one [scenario <name>] section per
// scenario. Throws std::runtime_error on unknown sections/keys or invalid
// values.
std::vector<ScenarioSpec> parse_campaign_spec(const KvFile& file);

struct CampaignConfig {
    std::vector<ScenarioSpec> scenarios;
    std::string out_dir;
    std::string tools_dir;  // empty: NC_TOOLS_DIR, else this binary's directory
};

// Runs every scenario x r cell, writes <out>/campaign.csv, per-run
// artifacts under <out>/<scenario>/r<value>/, and <out>/compare.txt.
// A failed run keeps its row with empty measured columns.
std::vector<CampaignRow> run_campaign(const CampaignConfig& config);

// Per-r comparison of live NC cost/loss against the closed-form
// retransmission bracket; marks the rows where coding is cheaper.
std::string compare_report(const std::vector<CampaignRow>& rows);

} // namespace nc
