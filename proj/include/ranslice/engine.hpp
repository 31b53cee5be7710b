#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ranslice/domain.hpp"
#include "ranslice/metrics.hpp"
#include "ranslice/scheduler.hpp"

namespace ranslice {

enum class RunMode { Proposed, Tddqn, FixedThreshold, FixedAllocation };

std::string_view to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view text);

// KPIs of one slice over one intra reporting window.
struct WindowRow {
    std::int64_t window = 0;
    SliceId slice = SliceId::E;
    SliceKpi kpi;
    double tau_s = 0.0;
    int rbgs = 0;
};

struct AgentLogRow {
    std::int64_t window = 0;  // intra window index at which the agent was invoked
    std::string agent;
    double epsilon = 0.0;
    int action = 0;
    std::optional<double> reward;
    std::optional<double> loss;
};

struct RunCounters {
    std::int64_t ttis = 0;
    std::int64_t intra_windows = 0;
    std::int64_t inter_windows = 0;
    PerSlice<std::int64_t> intra_invocations{};
    std::int64_t inter_invocations = 0;
    std::int64_t rb_violations = 0;
    std::int64_t max_rbs_granted = 0;  // largest per-ORU total over all TTIs
    std::int64_t arrived_packets = 0;
    std::int64_t served_packets = 0;
    std::int64_t queued_packets = 0;
    std::int64_t arrived_bits = 0;
    std::int64_t served_bits = 0;
    std::int64_t queued_bits = 0;
    std::int64_t reassociations = 0;
};

struct RunRecord {
    RunMode mode = RunMode::Proposed;
    std::uint64_t seed = 0;
    std::vector<WindowRow> windows;
    std::vector<AgentLogRow> agent_log;
    // Allocation in force during each inter window.
    std::vector<SliceAllocation> allocations;
    RunCounters counters;
    double wall_clock_s = 0.0;
};

struct TtiSnapshot {
    std::int64_t tti = 0;
    const SliceAllocation& allocation;
    std::span<const Grant> grants;
    std::span<const SliceId> grant_slices;
    PerSlice<double> utilization{};
};

struct RunOptions {
    RunMode mode = RunMode::Proposed;
    std::optional<std::uint64_t> seed;  // overrides the scenario seed
    std::optional<std::filesystem::path> load_agents;
    std::optional<std::filesystem::path> save_agents;
    std::ostream* channel_trace = nullptr;  // CSV: tti,user,oru,gain_db,sinr_db
    std::ostream* grant_trace = nullptr;    // CSV: tti,slice,user,oru,rbs,mod_order,bits
    std::function<void(const TtiSnapshot&)> observer;
};

// Runs the multi-timescale loop for the scenario's duration. Every TTI:
// mobility and fading, agent decisions at window boundaries, arrivals,
// per-slice scheduling, transmission and KPI accrual.
RunRecord run(const ScenarioConfig& cfg, const RunOptions& opts);

// Runs `seconds` of the proposed scheme and saves every agent to `dir`.
// Zero seconds saves freshly initialized agents.
RunRecord pretrain(const ScenarioConfig& cfg, double seconds, const std::filesystem::path& dir,
                   std::optional<std::uint64_t> seed = std::nullopt);

struct SliceSummary {
    double umax_norm = 0.0;  // time average over windows
    double umax_raw = 0.0;
    double r_avg = 0.0;
    double r_raw_bps = 0.0;
    double d_avg = 0.0;  // over windows with completed packets
    double d_raw_s = 0.0;
    double p_bar = 0.0;
    double d_avg_min = 0.0;  // minimum windowed d_avg
};

struct RunSummary {
    RunMode mode = RunMode::Proposed;
    std::uint64_t seed = 0;
    PerSlice<SliceSummary> slices{};
    double umax_norm_total = 0.0;  // sum over slices
};

RunSummary summarize(const RunRecord& record);

struct ComparisonRow {
    RunMode mode = RunMode::Proposed;
    SliceId slice = SliceId::E;
    SliceSummary median;  // per-field median over seeds
    // Relative to the reference mode; P_bar as an absolute difference.
    double delta_umax_norm = 0.0;
    double delta_r_avg = 0.0;
    double delta_d_avg = 0.0;
    double delta_p_bar = 0.0;
};

struct Comparison {
    RunMode reference = RunMode::Proposed;
    std::vector<RunMode> modes;
    std::vector<RunSummary> runs;
    std::vector<ComparisonRow> rows;
    std::vector<double> umax_norm_total_median;  // per mode, same order as `modes`
};

double median(std::vector<double> values);

// Relative change (value - ref) / |ref|; plain difference when ref is zero.
double relative_delta(double value, double reference);

// Medians and deltas from per-run summaries; the first mode is the reference.
Comparison aggregate(std::span<const RunSummary> runs, std::span<const RunMode> modes);

// Runs every mode on every seed. `on_run` sees each record as it completes.
Comparison compare(const ScenarioConfig& cfg, std::span<const RunMode> modes, std::span<const std::uint64_t> seeds,
                   const std::function<void(const RunRecord&)>& on_run = {});

}  // namespace ranslice
