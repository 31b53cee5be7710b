#pragma once

#include <filesystem>
#include <string>

#include "ranslice/engine.hpp"

namespace ranslice {

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// windows.csv columns:
//   window_index, slice, R_avg, d_avg, P_bar, Umax, delta, epsilon,
//   umax_norm, epsilon_norm, R_raw_bps, d_raw_s, completed,
//   users_without_completions, tau_s, rbgs
// d_avg and d_raw_s are empty for windows in which the slice completed nothing.
void write_windows_csv(const RunRecord& record, const std::filesystem::path& path);

// agents.csv columns: window, agent, epsilon, action, reward, loss
// reward is empty on an agent's first invocation, loss while the replay
// buffer holds less than one batch.
void write_agents_csv(const RunRecord& record, const std::filesystem::path& path);

// eccdf_<kpi>_<slice>.csv with columns value, fraction_above, over the
// per-window samples of throughput (R_raw_bps), delay (d_raw_s) and
// umax (raw Umax).
void write_eccdf_csvs(const RunRecord& record, const std::filesystem::path& dir);

// Flat key/value JSON: "<slice>.<field>" per slice plus mode, seed and totals.
void write_run_summary(const RunRecord& record, const std::filesystem::path& path);

// Everything above plus run_info.json (wall clock and counters; the only file
// that is not reproducible byte-for-byte).
void write_run(const RunRecord& record, const std::filesystem::path& dir);

// comparison.csv columns:
//   mode, slice, umax_norm, umax_raw, R_avg, R_raw_bps, d_avg, d_raw_s, P_bar,
//   d_avg_min, delta_umax_norm, delta_R_avg, delta_d_avg, delta_P_bar
// summary.json flattens the same table as "<mode>.<slice>.<column>" keys.
void write_comparison(const Comparison& cmp, const std::filesystem::path& dir);

}  // namespace ranslice
