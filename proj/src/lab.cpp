#include "nc/lab.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nc/reliability.hpp"
#include "nc/rng.hpp"
#include "nc/udp.hpp"

namespace fs = std::filesystem;

namespace nc {
namespace {

double parse_double_value(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("bad number for " + what + ": '" + text + "'");
    }
}

std::uint64_t parse_u64_value(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("bad integer for " + what + ": '" + text + "'");
    }
}

std::vector<double> parse_grid(const std::string& text) {
    if (text == "default") return default_loss_grid();
    std::vector<double> grid;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) grid.push_back(parse_double_value(item, "loss grid"));
    return grid;
}

Rational approx_rational(double x) {
    return Rational(std::llround(x * 1e6), 1000000LL);
}

std::map<std::string, std::string> read_kv_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing csv: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {  // header row
            first = false;
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("malformed csv row in " + path + ": " + line);
        out[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return out;
}

// --- child process plumbing ---------------------------------------------

pid_t spawn_process(const std::string& exe, const std::vector<std::string>& args,
                    const std::string& log_path) {
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd >= 0) {
            ::dup2(fd, 1);
            ::dup2(fd, 2);
            ::close(fd);
        }
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(exe.c_str()));
        for (const std::string& arg : args) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        ::execv(exe.c_str(), argv.data());
        ::_exit(127);
    }
    return pid;
}

// false on timeout (child still running).
bool wait_exit(pid_t pid, int timeout_ms, int* status_out) {
    const std::int64_t deadline = monotonic_us() + std::int64_t{timeout_ms} * 1000;
    while (true) {
        int status = 0;
        const pid_t got = ::waitpid(pid, &status, WNOHANG);
        if (got == pid) {
            if (status_out) *status_out = status;
            return true;
        }
        if (got < 0) {  // already reaped or gone
            if (status_out) *status_out = 0;
            return true;
        }
        if (monotonic_us() >= deadline) return false;
        ::usleep(20000);
    }
}

void stop_child(pid_t pid) {
    if (pid <= 0) return;
    ::kill(pid, SIGTERM);
    if (!wait_exit(pid, 3000, nullptr)) {
        ::kill(pid, SIGKILL);
        wait_exit(pid, 2000, nullptr);
    }
}

struct Child {
    pid_t pid = -1;
    std::string name;
};

std::string resolve_tools_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("NC_TOOLS_DIR"); env && *env) return env;
    return fs::read_symlink("/proc/self/exe").parent_path().string();
}

std::string tool_path(const std::string& dir, const std::string& name) {
    const std::string path = dir + "/" + name;
    if (::access(path.c_str(), X_OK) != 0)
        throw std::runtime_error("tool not found or not executable: " + path);
    return path;
}

std::vector<std::uint16_t> probe_free_ports(std::size_t count) {
    std::vector<UdpSocket> held;
    std::vector<std::uint16_t> ports;
    for (std::size_t i = 0; i < count; ++i) {
        held.push_back(UdpSocket::bind_loopback(0));
        ports.push_back(held.back().local_addr().port());
    }
    return ports;  // sockets close here; the ports stay distinct
}

std::string fmt(double v) { return format_sig6(v); }

// --- one live pipeline run ------------------------------------------------

struct LiveResult {
    bool ok = false;
    std::string error;
    double throughput_mbps = 0;
    double jitter_ms = 0;
    double delivered_loss = 0;
    double tx_per_source_packet = 0;
};

LiveResult run_live_cell(const ScenarioSpec& spec, double r, std::size_t r_index,
                         const std::string& run_dir, const std::string& relay_tool,
                         const std::string& channel_tool, const std::string& traffic_tool) {
    LiveResult result;
    fs::create_directories(run_dir);
    const auto ports = probe_free_ports(4);
    const std::uint16_t sink_port = ports[0];
    const std::uint16_t decode_port = ports[1];
    const std::uint16_t channel_port = ports[2];
    const std::uint16_t encode_port = ports[3];
    const std::uint64_t channel_seed = derive_seed(spec.seed, 1 + r_index);
    const double rate_bps = spec.rate_mbps * 1e6;
    const auto at = [&](const std::string& file) { return run_dir + "/" + file; };
    const auto loop = [](std::uint16_t port) { return "127.0.0.1:" + std::to_string(port); };

    std::vector<Child> children;
    auto fail = [&](const std::string& why) {
        for (auto it = children.rbegin(); it != children.rend(); ++it) stop_child(it->pid);
        result.ok = false;
        result.error = why;
        return result;
    };

    // sink
    children.push_back({spawn_process(traffic_tool,
                                      {"sink", "--listen", std::to_string(sink_port), "--csv",
                                       at("sink.csv"), "--idle-exit-ms", "1000", "--max-wait-s",
                                       fmt(spec.duration_s + 15.0)},
                                      at("sink.log")),
                        "sink"});
    // decoder-side proxy
    if (spec.kind == ScenarioKind::nc) {
        children.push_back(
            {spawn_process(relay_tool,
                           {"decode", "--coded-port", std::to_string(decode_port), "--consumer",
                            loop(sink_port), "--k", std::to_string(spec.coding.k), "--n",
                            std::to_string(spec.coding.n), "--symbol-size",
                            std::to_string(spec.coding.symbol_size), "--release",
                            spec.release == ReleasePolicy::early ? "early" : "burst",
                            "--idle-timeout-ms", "50", "--seed", std::to_string(spec.seed),
                            "--metrics-csv", at("decoder.csv")},
                           at("decoder.log")),
             "decoder"});
    } else {
        children.push_back({spawn_process(relay_tool,
                                          {"passthrough", "--app-port",
                                           std::to_string(decode_port), "--peer", loop(sink_port),
                                           "--metrics-csv", at("decoder.csv")},
                                          at("decoder.log")),
                            "out-proxy"});
    }
    // lossy channel
    {
        std::vector<std::string> args = {"--listen",   std::to_string(channel_port),
                                         "--forward",  loop(decode_port),
                                         "--loss-rate", fmt(r),
                                         "--seed",     std::to_string(channel_seed),
                                         "--metrics-csv", at("channel.csv")};
        if (spec.channel_delay_ms > 0) {
            args.push_back("--delay-ms");
            args.push_back(fmt(spec.channel_delay_ms));
        }
        if (spec.channel_jitter_ms > 0) {
            args.push_back("--jitter-ms");
            args.push_back(fmt(spec.channel_jitter_ms));
        }
        children.push_back({spawn_process(channel_tool, args, at("channel.log")), "channel"});
    }
    // encoder-side proxy
    if (spec.kind == ScenarioKind::nc) {
        children.push_back(
            {spawn_process(relay_tool,
                           {"encode", "--app-port", std::to_string(encode_port), "--peer",
                            loop(channel_port), "--k", std::to_string(spec.coding.k), "--n",
                            std::to_string(spec.coding.n), "--symbol-size",
                            std::to_string(spec.coding.symbol_size), "--idle-timeout-ms", "50",
                            "--seed", std::to_string(spec.seed), "--metrics-csv",
                            at("encoder.csv")},
                           at("encoder.log")),
             "encoder"});
    } else {
        children.push_back({spawn_process(relay_tool,
                                          {"passthrough", "--app-port",
                                           std::to_string(encode_port), "--peer",
                                           loop(channel_port), "--metrics-csv",
                                           at("encoder.csv")},
                                          at("encoder.log")),
                            "in-proxy"});
    }
    ::usleep(200000);  // let the proxies come up before traffic starts

    const pid_t sender = spawn_process(
        traffic_tool,
        {"send", "--rate", fmt(rate_bps), "--size", std::to_string(spec.payload_size),
         "--duration", fmt(spec.duration_s), "--dest", loop(encode_port), "--csv",
         at("sender.csv")},
        at("sender.log"));
    int status = 0;
    if (!wait_exit(sender, static_cast<int>(spec.duration_s * 1000) + 20000, &status)) {
        stop_child(sender);
        return fail("sender timed out");
    }
    if (status != 0) return fail("sender exited with status " + std::to_string(status));

    // the sink leaves on its own after the stream drains
    const pid_t sink_pid = children.front().pid;
    if (!wait_exit(sink_pid, 30000, &status)) {
        stop_child(sink_pid);
        return fail("sink timed out");
    }
    children.front().pid = -1;
    if (status != 0) return fail("sink exited with status " + std::to_string(status));

    for (auto it = children.rbegin(); it != children.rend(); ++it) stop_child(it->pid);

    try {
        const auto sender_csv = read_kv_csv(at("sender.csv"));
        const auto sink_csv = read_kv_csv(at("sink.csv"));
        const auto encoder_csv = read_kv_csv(at("encoder.csv"));
        const double sent = parse_double_value(sender_csv.at("packets_sent"), "packets_sent");
        const double delivered =
            parse_double_value(sink_csv.at("packets_delivered"), "packets_delivered");
        result.throughput_mbps =
            parse_double_value(sink_csv.at("throughput_mbps"), "throughput_mbps");
        result.jitter_ms = parse_double_value(sink_csv.at("jitter_ms"), "jitter_ms");
        result.delivered_loss = sent > 0 ? std::max(0.0, 1.0 - delivered / sent) : 0.0;
        const double relayed_in =
            parse_double_value(encoder_csv.at("datagrams_in"), "datagrams_in");
        double relayed_out = 0;
        if (spec.kind == ScenarioKind::nc) {
            relayed_out = parse_double_value(encoder_csv.at("systematic_sent"), "systematic") +
                          parse_double_value(encoder_csv.at("coded_sent"), "coded");
        } else {
            relayed_out = parse_double_value(encoder_csv.at("forwarded"), "forwarded");
        }
        result.tx_per_source_packet = relayed_in > 0 ? relayed_out / relayed_in : 0.0;
        result.ok = true;
    } catch (const std::exception& ex) {
        result.ok = false;
        result.error = ex.what();
    }
    return result;
}

const std::set<std::string> kCampaignKeys = {"grid",    "rate_mbps", "duration_s", "payload",
                                             "seed",    "delay_ms",  "jitter_ms"};
const std::set<std::string> kScenarioKeys = {
    "kind",     "k",         "n",          "symbol_size", "release", "model",    "grid",
    "rate_mbps", "duration_s", "payload",   "seed",        "delay_ms", "jitter_ms"};

} // namespace

std::vector<double> default_loss_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 9; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

void ScenarioSpec::validate() const {
    if (name.empty()) throw std::runtime_error("scenario name must not be empty");
    if (name.find(',') != std::string::npos)
        throw std::runtime_error("scenario name must not contain commas: " + name);
    if (loss_grid.empty()) throw std::runtime_error("scenario " + name + ": empty loss grid");
    for (double r : loss_grid)
        if (!(r >= 0.0 && r < 1.0))
            throw std::runtime_error("scenario " + name + ": loss rate out of [0,1): " + fmt(r));
    if (rate_mbps <= 0) throw std::runtime_error("scenario " + name + ": rate must be positive");
    if (duration_s <= 0)
        throw std::runtime_error("scenario " + name + ": duration must be positive");
    if (payload_size < 16)
        throw std::runtime_error("scenario " + name + ": payload must be at least 16 octets");
    if (kind == ScenarioKind::nc) {
        coding.validate();
        if (static_cast<std::size_t>(coding.max_payload()) < payload_size)
            throw std::runtime_error("scenario " + name + ": symbol size too small for payload");
    }
}

std::string ScenarioSpec::code_rate_label() const {
    switch (kind) {
        case ScenarioKind::passthrough:
            return "1";
        case ScenarioKind::model:
            return "";
        case ScenarioKind::nc: {
            const int g = std::gcd(coding.k, coding.n);
            return std::to_string(coding.k / g) + "/" + std::to_string(coding.n / g);
        }
    }
    return "";
}

std::vector<ScenarioSpec> parse_campaign_spec(const KvFile& file) {
    ScenarioSpec defaults;
    defaults.loss_grid = default_loss_grid();

    if (const KvSection* preamble = file.find(""); preamble && !preamble->values.empty())
        throw std::runtime_error("config keys must live inside a section");

    if (const KvSection* campaign = file.find("campaign")) {
        for (const auto& [key, value] : campaign->values) {
            if (!kCampaignKeys.count(key))
                throw std::runtime_error("unknown key '" + key + "' in [campaign]");
            if (key == "grid") defaults.loss_grid = parse_grid(value);
            else if (key == "rate_mbps") defaults.rate_mbps = parse_double_value(value, key);
            else if (key == "duration_s") defaults.duration_s = parse_double_value(value, key);
            else if (key == "payload")
                defaults.payload_size = static_cast<std::size_t>(parse_u64_value(value, key));
            else if (key == "seed") defaults.seed = parse_u64_value(value, key);
            else if (key == "delay_ms") defaults.channel_delay_ms = parse_double_value(value, key);
            else if (key == "jitter_ms")
                defaults.channel_jitter_ms = parse_double_value(value, key);
        }
    }

    std::vector<ScenarioSpec> specs;
    std::set<std::string> names;
    for (const KvSection& section : file.sections) {
        if (section.name.empty() || section.name == "campaign") continue;
        if (section.name.rfind("scenario ", 0) != 0)
            throw std::runtime_error("unknown section [" + section.name + "]");
        ScenarioSpec spec = defaults;
        spec.name = section.name.substr(9);
        if (!names.insert(spec.name).second)
            throw std::runtime_error("duplicate scenario name: " + spec.name);
        bool saw_k = false, saw_n = false;
        for (const auto& [key, value] : section.values) {
            if (!kScenarioKeys.count(key))
                throw std::runtime_error("unknown key '" + key + "' in [scenario " + spec.name +
                                         "]");
            if (key == "kind") {
                if (value == "passthrough") spec.kind = ScenarioKind::passthrough;
                else if (value == "nc") spec.kind = ScenarioKind::nc;
                else if (value == "model") spec.kind = ScenarioKind::model;
                else throw std::runtime_error("unknown kind '" + value + "'");
            } else if (key == "k") {
                spec.coding.k = static_cast<int>(parse_u64_value(value, key));
                saw_k = true;
            } else if (key == "n") {
                spec.coding.n = static_cast<int>(parse_u64_value(value, key));
                saw_n = true;
            } else if (key == "symbol_size") {
                spec.coding.symbol_size = static_cast<std::size_t>(parse_u64_value(value, key));
            } else if (key == "release") {
                if (value == "burst") spec.release = ReleasePolicy::burst;
                else if (value == "early") spec.release = ReleasePolicy::early;
                else throw std::runtime_error("unknown release policy '" + value + "'");
            } else if (key == "model") {
                if (value == "ha-min") spec.model = ModelForm::ha_min;
                else if (value == "ha-max") spec.model = ModelForm::ha_max;
                else throw std::runtime_error("unknown model '" + value + "'");
            } else if (key == "grid") {
                spec.loss_grid = parse_grid(value);
            } else if (key == "rate_mbps") {
                spec.rate_mbps = parse_double_value(value, key);
            } else if (key == "duration_s") {
                spec.duration_s = parse_double_value(value, key);
            } else if (key == "payload") {
                spec.payload_size = static_cast<std::size_t>(parse_u64_value(value, key));
            } else if (key == "seed") {
                spec.seed = parse_u64_value(value, key);
            } else if (key == "delay_ms") {
                spec.channel_delay_ms = parse_double_value(value, key);
            } else if (key == "jitter_ms") {
                spec.channel_jitter_ms = parse_double_value(value, key);
            }
        }
        if (spec.kind == ScenarioKind::nc) {
            if (!section.has("symbol_size"))
                spec.coding.symbol_size = spec.payload_size + 2;  // room for the length frame
        } else if (saw_k || saw_n || section.has("release") || section.has("symbol_size")) {
            throw std::runtime_error("scenario " + spec.name +
                                     ": coding keys are only valid when kind = nc");
        }
        if (spec.kind != ScenarioKind::model && section.has("model"))
            throw std::runtime_error("scenario " + spec.name +
                                     ": 'model' is only valid when kind = model");
        spec.validate();
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw std::runtime_error("no scenarios defined");
    return specs;
}

std::vector<CampaignRow> run_campaign(const CampaignConfig& config) {
    if (config.scenarios.empty()) throw std::runtime_error("campaign has no scenarios");
    if (config.out_dir.empty()) throw std::runtime_error("campaign needs an output directory");
    for (const ScenarioSpec& spec : config.scenarios) spec.validate();

    const std::string tools = resolve_tools_dir(config.tools_dir);
    std::string relay_tool;
    std::string channel_tool;
    std::string traffic_tool;
    bool any_live = false;
    for (const ScenarioSpec& spec : config.scenarios)
        if (spec.kind != ScenarioKind::model) any_live = true;
    if (any_live) {
        relay_tool = tool_path(tools, "nc-relay");
        channel_tool = tool_path(tools, "nc-channel");
        traffic_tool = tool_path(tools, "nc-traffic");
    }
    fs::create_directories(config.out_dir);

    std::vector<CampaignRow> rows;
    for (const ScenarioSpec& spec : config.scenarios) {
        for (std::size_t i = 0; i < spec.loss_grid.size(); ++i) {
            const double r = spec.loss_grid[i];
            CampaignRow row;
            row.scenario = spec.name;
            row.loss_rate = r;
            row.code_rate = spec.code_rate_label();
            if (spec.kind == ScenarioKind::model) {
                const Rational rr = approx_rational(r);
                const Rational cost =
                    spec.model == ModelForm::ha_min ? p_ha_min(rr) : p_ha_max(rr);
                row.delivered_loss = 0.0;  // retransmission repeats until delivery
                row.tx_per_source_packet = to_double(cost);
            } else {
                const std::string run_dir =
                    config.out_dir + "/" + spec.name + "/r" + fmt(r);
                const LiveResult live = run_live_cell(spec, r, i, run_dir, relay_tool,
                                                      channel_tool, traffic_tool);
                if (live.ok) {
                    row.throughput_mbps = live.throughput_mbps;
                    row.jitter_ms = live.jitter_ms;
                    row.delivered_loss = live.delivered_loss;
                    row.tx_per_source_packet = live.tx_per_source_packet;
                } else {
                    std::cerr << "campaign: scenario " << spec.name << " r=" << fmt(r)
                              << " failed: " << live.error << '\n';
                }
            }
            rows.push_back(std::move(row));
        }
    }
    std::ofstream csv(config.out_dir + "/campaign.csv");
    if (!csv) throw std::runtime_error("cannot write campaign csv in " + config.out_dir);
    csv << emit_csv(rows);
    std::ofstream report(config.out_dir + "/compare.txt");
    report << compare_report(rows);
    return rows;
}

std::string compare_report(const std::vector<CampaignRow>& rows) {
    std::ostringstream out;
    std::vector<const CampaignRow*> nc_rows;
    for (const CampaignRow& row : rows)
        if (!row.code_rate.empty() && row.code_rate != "1") nc_rows.push_back(&row);
    if (nc_rows.empty()) {
        out << "no coded scenarios in campaign\n";
        return out.str();
    }
    std::stable_sort(nc_rows.begin(), nc_rows.end(),
                     [](const CampaignRow* a, const CampaignRow* b) {
                         return a->loss_rate < b->loss_rate;
                     });
    for (const CampaignRow* row : nc_rows)
        if (!row->delivered_loss)
            out << "warning: scenario " << row->scenario << " r=" << fmt(row->loss_rate)
                << " has no measurements\n";
    out << "loss_rate scenario code_rate nc_tx_per_source harq_arq_bracket nc_advantage "
           "delivered_loss cheaper\n";
    for (const CampaignRow* row : nc_rows) {
        const Rational cr = parse_rational(row->code_rate);
        const Rational tx_nc = Rational(1) / cr;
        const Rational rr = approx_rational(row->loss_rate);
        const Rational lo = p_ha_min(rr);
        const Rational hi = p_ha_max(rr);
        const Rational advantage = nc_advantage(rr);
        out << fmt(row->loss_rate) << ' ' << row->scenario << ' ' << row->code_rate << ' '
            << fmt(to_double(tx_nc)) << ' ' << "[" << fmt(to_double(lo)) << ", "
            << fmt(to_double(hi)) << "]" << ' ' << fmt(to_double(advantage)) << ' '
            << (row->delivered_loss ? fmt(*row->delivered_loss) : std::string("n/a")) << ' '
            << (tx_nc < lo ? "NC" : "retx") << '\n';
    }
    return out.str();
}

} // namespace nc
