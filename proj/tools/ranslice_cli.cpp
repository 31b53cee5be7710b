#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranslice/config_io.hpp"
#include "ranslice/engine.hpp"
#include "ranslice/output.hpp"

using namespace ranslice;

namespace {

struct ScenarioFlags {
    std::string config;
    std::optional<double> duration;
    std::optional<int> inter_period;
    bool qos_literal = false;
    bool reward_literal_sign = false;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
    cmd->add_option("--config", f.config, "scenario file (JSON); defaults apply when omitted");
    cmd->add_option("--duration", f.duration, "simulated seconds");
    cmd->add_option("--inter-period", f.inter_period, "inter-slice period in TTIs");
    cmd->add_flag("--qos-literal", f.qos_literal, "QoS delay test as d_norm >= 1");
    cmd->add_flag("--reward-literal-sign", f.reward_literal_sign, "intra reward with +alpha * U");
}

ScenarioConfig build_scenario(const ScenarioFlags& f) {
    ScenarioConfig cfg = f.config.empty() ? make_default_scenario() : load_scenario(f.config);
    if (f.duration) cfg.duration_s = *f.duration;
    if (f.inter_period) cfg.cadence.inter_period_ttis = *f.inter_period;
    if (f.qos_literal) cfg.qos_literal = true;
    if (f.reward_literal_sign) cfg.reward_literal_sign = true;
    return validate_scenario(cfg);
}

RunMode mode_from(const std::string& text) {
    auto m = parse_run_mode(text);
    if (!m) throw CLI::ValidationError("--mode", "unknown mode '" + text + "'");
    return *m;
}

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw CLI::ValidationError("--seeds", "bad seed '" + text + "'");
    return v;
}

// "1..5" or "3,7,11"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = parse_u64(text.substr(0, dots));
        const auto hi = parse_u64(text.substr(dots + 2));
        if (hi < lo) throw CLI::ValidationError("--seeds", "empty range " + text);
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        seeds.push_back(parse_u64(text.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return seeds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-timescale RAN slicing simulator"};
    app.require_subcommand(1);

    ScenarioFlags sim_flags;
    std::string sim_mode = "proposed";
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out;
    std::string save_agents, load_agents;
    bool trace_channel = false, trace_grants = false, print_default = false;
    auto* sim = app.add_subcommand("simulate", "run one scenario");
    add_scenario_flags(sim, sim_flags);
    sim->add_option("--mode", sim_mode, "proposed | tddqn | fixed-threshold | fixed-allocation");
    sim->add_option("--seed", sim_seed, "seed (overrides the scenario seed)");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--save-agents", save_agents, "directory for agent checkpoints after the run");
    sim->add_option("--load-agents", load_agents, "directory with agent checkpoints to start from");
    sim->add_flag("--trace-channel", trace_channel, "write channel_trace.csv");
    sim->add_flag("--trace-grants", trace_grants, "write grant_trace.csv");
    sim->add_flag("--print-default-config", print_default, "print the default scenario and exit");

    ScenarioFlags cmp_flags;
    std::string cmp_modes = "proposed,tddqn", cmp_seeds = "1..5", cmp_out;
    auto* cmp = app.add_subcommand("compare", "run several modes over several seeds");
    add_scenario_flags(cmp, cmp_flags);
    cmp->add_option("--modes", cmp_modes, "comma-separated modes; the first is the reference");
    cmp->add_option("--seeds", cmp_seeds, "range a..b or comma list");
    cmp->add_option("--out", cmp_out, "output directory")->required();

    ScenarioFlags pre_flags;
    double pre_seconds = 100.0;
    std::optional<std::uint64_t> pre_seed;
    std::string pre_dir;
    auto* pre = app.add_subcommand("pretrain", "train the proposed agents and save checkpoints");
    add_scenario_flags(pre, pre_flags);
    pre->add_option("--seconds", pre_seconds, "training horizon in simulated seconds");
    pre->add_option("--seed", pre_seed, "seed");
    pre->add_option("--save-agents", pre_dir, "checkpoint directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            if (print_default) {
                std::cout << dump_scenario(make_default_scenario());
                return 0;
            }
            if (sim_out.empty()) throw CLI::RequiredError("--out");
            const ScenarioConfig cfg = build_scenario(sim_flags);
            RunOptions opts;
            opts.mode = mode_from(sim_mode);
            opts.seed = sim_seed;
            if (!load_agents.empty()) opts.load_agents = load_agents;
            if (!save_agents.empty()) opts.save_agents = save_agents;
            std::filesystem::create_directories(sim_out);
            std::ofstream channel_out, grant_out;
            if (trace_channel) {
                channel_out.open(std::filesystem::path(sim_out) / "channel_trace.csv");
                channel_out << "tti,user,oru,gain_db,sinr_db\n";
                opts.channel_trace = &channel_out;
            }
            if (trace_grants) {
                grant_out.open(std::filesystem::path(sim_out) / "grant_trace.csv");
                grant_out << "tti,slice,user,oru,rbs,mod_order,bits\n";
                opts.grant_trace = &grant_out;
            }
            const RunRecord rec = run(cfg, opts);
            write_run(rec, sim_out);
            std::cerr << to_string(rec.mode) << " seed " << rec.seed << ": " << rec.counters.ttis << " TTIs in "
                      << rec.wall_clock_s << " s\n";
        } else if (*cmp) {
            const ScenarioConfig cfg = build_scenario(cmp_flags);
            std::vector<RunMode> modes;
            std::size_t start = 0;
            while (start <= cmp_modes.size()) {
                const auto comma = cmp_modes.find(',', start);
                modes.push_back(mode_from(cmp_modes.substr(start, comma - start)));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            const auto seeds = parse_seeds(cmp_seeds);
            const std::filesystem::path out(cmp_out);
            const Comparison result = compare(cfg, modes, seeds, [&](const RunRecord& rec) {
                const auto dir = out / "runs" / (std::string(to_string(rec.mode)) + "_seed" + std::to_string(rec.seed));
                write_run(rec, dir);
                std::cerr << to_string(rec.mode) << " seed " << rec.seed << " done in " << rec.wall_clock_s << " s\n";
            });
            write_comparison(result, out);
        } else if (*pre) {
            const ScenarioConfig cfg = build_scenario(pre_flags);
            const RunRecord rec = pretrain(cfg, pre_seconds, pre_dir, pre_seed);
            std::cerr << "pretrained " << rec.counters.ttis << " TTIs, checkpoints in " << pre_dir << "\n";
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
