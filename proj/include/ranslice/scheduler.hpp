#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ranslice/channel.hpp"
#include "ranslice/domain.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

// Bits per symbol for a linear SINR; thresholds are lower-inclusive.
int modulation_order(double sinr, const std::array<double, 3>& thresholds);

struct RbgLink {
    double sinr = 0.0;  // capacity-equivalent SINR over the RBG
    int mod_order = 2;
    std::int64_t bits = 0;  // payload the RBG carries this TTI
    double shannon_rate_bps = 0.0;
};

class LinkModel {
public:
    virtual ~LinkModel() = default;
    virtual RbgLink rbg_link(int user, int oru, int rbg) const = 0;
};

// Link adaptation against a channel snapshot and an interference usage map.
// Payload per RBG is min(Shannon bits, O * S * subcarriers * RBs * layers).
class ChannelLinkModel : public LinkModel {
public:
    ChannelLinkModel(const ChannelState& channel, const RbUsage& interference_usage, const ResourceGrid& grid,
                     const std::array<double, 3>& mod_thresholds);

    RbgLink rbg_link(int user, int oru, int rbg) const override;

private:
    const ChannelState& channel_;
    const RbUsage& usage_;
    const ResourceGrid& grid_;
    std::array<double, 3> thresholds_;
};

struct Grant {
    int user = 0;
    int oru = 0;
    int first_rb = 0;
    int rbs = 0;
    int mod_order = 2;
    int layers = 1;
    std::int64_t bits = 0;
    double sinr = 0.0;
    double shannon_rate_bps = 0.0;
};

// Lexicographic service priority of a packet: packets at or past the
// threshold come first, then the smallest |tau - delay|, then the lower user id.
struct PriorityKey {
    bool before_threshold = false;
    double distance_s = 0.0;
    int user = 0;

    friend auto operator<=>(const PriorityKey&, const PriorityKey&) = default;
};

PriorityKey priority_key(double tau_s, double delay_s, int user);

struct HeadOfLine {
    int user = 0;
    double delay_s = 0.0;
};

// Users ordered by the priority key of their head packet.
std::vector<int> priority_order(std::span<const HeadOfLine> heads, double tau_s);

struct SliceUserView {
    int user = 0;
    int oru = 0;
    const UserBuffer* buffer = nullptr;
};

struct ScheduleRequest {
    SliceId slice = SliceId::E;
    double tau_s = 0.0;
    int budget_rbgs = 0;  // per ORU
    int first_rbg = 0;    // start of the slice's RBG region at every ORU
    int orus = 1;
    std::int64_t now_ns = 0;
};

// Timeout-threshold scheduling for one slice and one TTI. The packet with the
// best priority key is covered RBG by RBG at its serving ORU; leftover payload
// carries over to the same user's next packet; the next best packet is then
// chosen, until every queued packet is covered or every budget is spent.
std::vector<Grant> schedule_slice(const ScheduleRequest& req, std::span<const SliceUserView> users,
                                  const LinkModel& link, const ResourceGrid& grid);

// sum N * S * l * O
double utilization(std::span<const Grant> grants, const ResourceGrid& grid);

struct DeviationReport {
    double umax = 0.0;
    double mean = 0.0;
    double delta = 0.0;
    bool zero_mean = false;
};

// Per-slice U^max over reporting windows and its deviation from the running
// mean of past window maxima.
class UtilizationSeries {
public:
    void record(double u);
    double window_max() const { return window_max_; }
    std::size_t window_samples() const { return window_samples_; }

    // Appends the window maximum to the history and starts a new window.
    DeviationReport close_window();

    std::size_t windows() const { return history_count_; }

private:
    double window_max_ = 0.0;
    std::size_t window_samples_ = 0;
    double history_sum_ = 0.0;
    std::size_t history_count_ = 0;
};

// delta of the last entry of `window_maxima` against the mean of all entries.
DeviationReport deviation_of(std::span<const double> window_maxima);

// Completed packets whose total delay reached the QoS bound.
int expiration_penalty(std::span<const Packet> completed, const QosProfile& qos, double processing_delay_s = 0.0);

}  // namespace ranslice
