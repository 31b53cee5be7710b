#include "ranslice/output.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ranslice {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void put_slice_summary(nlohmann::ordered_json& j, const std::string& prefix, const SliceSummary& s) {
    j[prefix + "umax_norm"] = s.umax_norm;
    j[prefix + "umax_raw"] = s.umax_raw;
    j[prefix + "R_avg"] = s.r_avg;
    j[prefix + "R_raw_bps"] = s.r_raw_bps;
    j[prefix + "d_avg"] = s.d_avg;
    j[prefix + "d_raw_s"] = s.d_raw_s;
    j[prefix + "P_bar"] = s.p_bar;
    j[prefix + "d_avg_min"] = s.d_avg_min;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_windows_csv(const RunRecord& record, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "window_index,slice,R_avg,d_avg,P_bar,Umax,delta,epsilon,umax_norm,epsilon_norm,R_raw_bps,d_raw_s,"
           "completed,users_without_completions,tau_s,rbgs\n";
    for (const auto& row : record.windows) {
        const auto& k = row.kpi;
        out << row.window << ',' << slice_key(row.slice) << ',' << format_number(k.r_avg) << ','
            << (k.has_delay ? format_number(k.d_avg) : "") << ',' << format_number(k.p_bar) << ','
            << format_number(k.umax) << ',' << format_number(k.delta) << ',' << k.epsilon << ','
            << format_number(k.umax_norm) << ',' << format_number(k.epsilon_norm) << ',' << format_number(k.r_raw_bps)
            << ',' << (k.has_delay ? format_number(k.d_raw_s) : "") << ',' << k.completed << ','
            << k.users_without_completions << ',' << format_number(row.tau_s) << ',' << row.rbgs << '\n';
    }
}

void write_agents_csv(const RunRecord& record, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "window,agent,epsilon,action,reward,loss\n";
    for (const auto& row : record.agent_log) {
        out << row.window << ',' << row.agent << ',' << format_number(row.epsilon) << ',' << row.action << ','
            << opt_number(row.reward) << ',' << opt_number(row.loss) << '\n';
    }
}

void write_eccdf_csvs(const RunRecord& record, const std::filesystem::path& dir) {
    for (SliceId s : kAllSlices) {
        std::vector<double> rate, delay, umax;
        for (const auto& row : record.windows) {
            if (row.slice != s) continue;
            rate.push_back(row.kpi.r_raw_bps);
            umax.push_back(row.kpi.umax);
            if (row.kpi.has_delay) delay.push_back(row.kpi.d_raw_s);
        }
        auto emit = [&](const std::string& kpi, const std::vector<double>& samples) {
            auto out = open_out(dir / ("eccdf_" + kpi + "_" + std::string(slice_key(s)) + ".csv"));
            out << "value,fraction_above\n";
            if (samples.empty()) return;
            for (const auto& p : eccdf(samples)) {
                out << format_number(p.value) << ',' << format_number(p.fraction_above) << '\n';
            }
        };
        emit("throughput", rate);
        emit("delay", delay);
        emit("umax", umax);
    }
}

void write_run_summary(const RunRecord& record, const std::filesystem::path& path) {
    const RunSummary sum = summarize(record);
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(record.mode));
    j["seed"] = record.seed;
    j["windows"] = record.counters.intra_windows;
    for (SliceId s : kAllSlices) put_slice_summary(j, std::string(slice_key(s)) + ".", sum.slices[index_of(s)]);
    j["umax_norm_total"] = sum.umax_norm_total;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_run(const RunRecord& record, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_windows_csv(record, dir / "windows.csv");
    write_agents_csv(record, dir / "agents.csv");
    write_eccdf_csvs(record, dir);
    write_run_summary(record, dir / "summary.json");

    const auto& c = record.counters;
    nlohmann::ordered_json info;
    info["wall_clock_s"] = record.wall_clock_s;
    info["ttis"] = c.ttis;
    info["intra_windows"] = c.intra_windows;
    info["inter_windows"] = c.inter_windows;
    for (SliceId s : kAllSlices) {
        info["intra_invocations." + std::string(slice_key(s))] = c.intra_invocations[index_of(s)];
    }
    info["inter_invocations"] = c.inter_invocations;
    info["rb_violations"] = c.rb_violations;
    info["max_rbs_granted"] = c.max_rbs_granted;
    info["arrived_packets"] = c.arrived_packets;
    info["served_packets"] = c.served_packets;
    info["queued_packets"] = c.queued_packets;
    info["arrived_bits"] = c.arrived_bits;
    info["served_bits"] = c.served_bits;
    info["queued_bits"] = c.queued_bits;
    info["reassociations"] = c.reassociations;
    auto out = open_out(dir / "run_info.json");
    out << info.dump(2) << '\n';
}

void write_comparison(const Comparison& cmp, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto csv = open_out(dir / "comparison.csv");
    csv << "mode,slice,umax_norm,umax_raw,R_avg,R_raw_bps,d_avg,d_raw_s,P_bar,d_avg_min,delta_umax_norm,delta_R_avg,"
           "delta_d_avg,delta_P_bar\n";
    nlohmann::ordered_json j;
    j["reference"] = std::string(to_string(cmp.reference));
    j["seeds"] = cmp.modes.empty() ? 0 : cmp.runs.size() / cmp.modes.size();
    for (const auto& row : cmp.rows) {
        const auto& m = row.median;
        csv << to_string(row.mode) << ',' << slice_key(row.slice) << ',' << format_number(m.umax_norm) << ','
            << format_number(m.umax_raw) << ',' << format_number(m.r_avg) << ',' << format_number(m.r_raw_bps) << ','
            << format_number(m.d_avg) << ',' << format_number(m.d_raw_s) << ',' << format_number(m.p_bar) << ','
            << format_number(m.d_avg_min) << ',' << format_number(row.delta_umax_norm) << ','
            << format_number(row.delta_r_avg) << ',' << format_number(row.delta_d_avg) << ','
            << format_number(row.delta_p_bar) << '\n';
        const std::string prefix = std::string(to_string(row.mode)) + "." + std::string(slice_key(row.slice)) + ".";
        put_slice_summary(j, prefix, m);
        j[prefix + "delta_umax_norm"] = row.delta_umax_norm;
        j[prefix + "delta_R_avg"] = row.delta_r_avg;
        j[prefix + "delta_d_avg"] = row.delta_d_avg;
        j[prefix + "delta_P_bar"] = row.delta_p_bar;
    }
    for (std::size_t i = 0; i < cmp.modes.size(); ++i) {
        j[std::string(to_string(cmp.modes[i])) + ".umax_norm_total"] = cmp.umax_norm_total_median[i];
    }
    auto out = open_out(dir / "summary.json");
    out << j.dump(2) << '\n';
}

}  // namespace ranslice
