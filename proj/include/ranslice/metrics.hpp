#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranslice/domain.hpp"
#include "ranslice/scheduler.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

class EmptySlice : public std::invalid_argument {
public:
    EmptySlice() : std::invalid_argument("slice average over zero users") {}
};

class EmptySamples : public std::invalid_argument {
public:
    EmptySamples() : std::invalid_argument("ECCDF of an empty sample") {}
};

// Mean of per-TTI allocated rates N * W_RB * log2(1 + sinr) over the horizon.
double user_mean_rate(std::span<const double> per_tti_rate_bps);
double normalize_rate(double mean_rate_bps, double min_rate_bps);
double slice_avg_rate(std::span<const double> normalized_rates);

// d_tx + d_queue + d_processing, in seconds.
double packet_delay(const Packet& p, double processing_delay_s);
// nullopt when the user completed no packets.
std::optional<double> user_mean_delay(std::span<const double> delays_s);
double normalize_delay(double mean_delay_s, double max_delay_s);

struct SliceDelay {
    double value = 0.0;  // mean over users with completions; 0 if none
    int excluded_users = 0;
};
SliceDelay slice_avg_delay(std::span<const std::optional<double>> normalized_delays);

// Satisfied iff rate_norm >= 1 and delay_norm <= 1; `literal` flips the delay
// comparison to >= 1.
bool qos_indicator(double rate_norm, std::optional<double> delay_norm, bool literal = false);
double slice_satisfaction(std::span<const bool> satisfied);

struct EccdfPoint {
    double value = 0.0;
    double fraction_above = 0.0;
};

// Sorted unique sample values with the fraction of samples strictly greater.
std::vector<EccdfPoint> eccdf(std::span<const double> samples);

// Exceedance fraction at an arbitrary value, read off an eccdf() table.
double eccdf_at(std::span<const EccdfPoint> table, double value, std::size_t sample_count);

struct SliceKpi {
    double r_avg = 0.0;      // mean normalized throughput
    double r_raw_bps = 0.0;  // sum of user mean rates
    double d_avg = 0.0;      // mean normalized delay over users with completions
    double d_raw_s = 0.0;    // mean user delay over users with completions
    bool has_delay = false;
    int users_without_completions = 0;
    double p_bar = 0.0;
    double umax = 0.0;
    double umax_norm = 0.0;
    double umax_mean = 0.0;
    double delta = 0.0;
    bool zero_mean = false;
    int epsilon = 0;
    int completed = 0;
    double epsilon_norm = 0.0;
};

// Accumulates per-user rates and delays and per-slice utilization over one
// reporting window.
class KpiWindow {
public:
    explicit KpiWindow(const ScenarioConfig& cfg);

    void add_rate(int user, double rate_bps) { users_[user].rate_sum_bps += rate_bps; }
    void end_tti() { ++ttis_; }
    void add_completion(int user, const Packet& p);
    void add_utilization(SliceId s, double u) { utilization_[index_of(s)].record(u); }

    int ttis() const { return ttis_; }

    // Closes the window. `umax_capacity` is the largest utilization the slice
    // could reach (all its RBs at every ORU, top modulation).
    PerSlice<SliceKpi> close(const PerSlice<double>& umax_capacity);

private:
    struct UserAcc {
        double rate_sum_bps = 0.0;
        double delay_sum_s = 0.0;
        int completed = 0;
        int expired = 0;
    };
    struct UserInfo {
        SliceId slice;
        QosProfile qos;
        double processing_s;
        std::int64_t max_delay_ns;
        std::int64_t processing_ns;
    };

    std::vector<UserInfo> info_;
    std::vector<UserAcc> users_;
    PerSlice<UtilizationSeries> utilization_{};
    int ttis_ = 0;
    bool qos_literal_;
};

}  // namespace ranslice
