#include "ranslice/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace ranslice {

int modulation_order(double sinr, const std::array<double, 3>& thresholds) {
    if (sinr < thresholds[0]) return 2;
    if (sinr < thresholds[1]) return 4;
    if (sinr < thresholds[2]) return 6;
    return 8;
}

ChannelLinkModel::ChannelLinkModel(const ChannelState& channel, const RbUsage& interference_usage,
                                   const ResourceGrid& grid, const std::array<double, 3>& mod_thresholds)
    : channel_(channel), usage_(interference_usage), grid_(grid), thresholds_(mod_thresholds) {}

RbgLink ChannelLinkModel::rbg_link(int user, int oru, int rbg) const {
    const int first = rbg * grid_.rbs_per_rbg;
    double log_sum = 0.0;
    for (int rb = first; rb < first + grid_.rbs_per_rbg; ++rb) {
        log_sum += std::log2(1.0 + channel_.sinr(user, oru, rb, usage_));
    }
    RbgLink link;
    link.shannon_rate_bps = grid_.layers * grid_.rb_bandwidth_hz * log_sum;
    link.sinr = std::exp2(log_sum / grid_.rbs_per_rbg) - 1.0;
    link.mod_order = modulation_order(link.sinr, thresholds_);
    const auto shannon_bits = static_cast<std::int64_t>(std::floor(link.shannon_rate_bps * grid_.tti_s));
    const std::int64_t symbol_bits = static_cast<std::int64_t>(link.mod_order) * grid_.symbols_per_tti *
                                     grid_.subcarriers_per_rb * grid_.rbs_per_rbg * grid_.layers;
    link.bits = std::min(shannon_bits, symbol_bits);
    return link;
}

PriorityKey priority_key(double tau_s, double delay_s, int user) {
    return {delay_s < tau_s, std::abs(tau_s - delay_s), user};
}

std::vector<int> priority_order(std::span<const HeadOfLine> heads, double tau_s) {
    std::vector<PriorityKey> keys;
    keys.reserve(heads.size());
    for (const auto& h : heads) keys.push_back(priority_key(tau_s, h.delay_s, h.user));
    std::sort(keys.begin(), keys.end());
    std::vector<int> order;
    order.reserve(keys.size());
    for (const auto& k : keys) order.push_back(k.user);
    return order;
}

std::vector<Grant> schedule_slice(const ScheduleRequest& req, std::span<const SliceUserView> users,
                                  const LinkModel& link, const ResourceGrid& grid) {
    struct Cursor {
        SliceUserView view;
        std::size_t next_packet = 0;
        std::int64_t spare_bits = 0;
        bool blocked = false;
    };
    std::vector<Cursor> cursors;
    cursors.reserve(users.size());
    for (const auto& u : users) cursors.push_back({u});
    std::vector<int> used(static_cast<std::size_t>(req.orus), 0);
    std::vector<Grant> grants;

    for (;;) {
        Cursor* best = nullptr;
        PriorityKey best_key;
        for (auto& c : cursors) {
            if (c.blocked || c.next_packet >= c.view.buffer->size()) continue;
            const Packet& p = c.view.buffer->at(c.next_packet);
            if (used[c.view.oru] >= req.budget_rbgs && c.spare_bits < p.remaining_bits) continue;
            const double delay = static_cast<double>(req.now_ns - p.arrival_ns) * 1e-9;
            const PriorityKey key = priority_key(req.tau_s, delay, c.view.user);
            if (!best || key < best_key) {
                best = &c;
                best_key = key;
            }
        }
        if (!best) break;

        const Packet& p = best->view.buffer->at(best->next_packet);
        const int oru = best->view.oru;
        while (best->spare_bits < p.remaining_bits && used[oru] < req.budget_rbgs) {
            const int rbg = req.first_rbg + used[oru];
            const RbgLink l = link.rbg_link(best->view.user, oru, rbg);
            ++used[oru];
            best->spare_bits += l.bits;
            grants.push_back({best->view.user, oru, rbg * grid.rbs_per_rbg, grid.rbs_per_rbg, l.mod_order, grid.layers,
                              l.bits, l.sinr, l.shannon_rate_bps});
        }
        if (best->spare_bits >= p.remaining_bits) {
            best->spare_bits -= p.remaining_bits;
            ++best->next_packet;
        } else {
            best->blocked = true;
        }
    }
    return grants;
}

double utilization(std::span<const Grant> grants, const ResourceGrid& grid) {
    double u = 0.0;
    for (const auto& g : grants) {
        u += static_cast<double>(g.rbs) * grid.symbols_per_tti * g.layers * g.mod_order;
    }
    return u;
}

void UtilizationSeries::record(double u) {
    window_max_ = window_samples_ == 0 ? u : std::max(window_max_, u);
    ++window_samples_;
}

DeviationReport UtilizationSeries::close_window() {
    DeviationReport r;
    r.umax = window_max_;
    history_sum_ += window_max_;
    ++history_count_;
    r.mean = history_sum_ / static_cast<double>(history_count_);
    if (r.mean == 0.0) {
        r.zero_mean = true;
    } else {
        r.delta = (r.umax - r.mean) / r.mean;
    }
    window_max_ = 0.0;
    window_samples_ = 0;
    return r;
}

DeviationReport deviation_of(std::span<const double> window_maxima) {
    DeviationReport r;
    if (window_maxima.empty()) {
        r.zero_mean = true;
        return r;
    }
    r.umax = window_maxima.back();
    r.mean = std::accumulate(window_maxima.begin(), window_maxima.end(), 0.0) / static_cast<double>(window_maxima.size());
    if (r.mean == 0.0) {
        r.zero_mean = true;
    } else {
        r.delta = (r.umax - r.mean) / r.mean;
    }
    return r;
}

int expiration_penalty(std::span<const Packet> completed, const QosProfile& qos, double processing_delay_s) {
    const std::int64_t bound = to_nanoseconds(qos.max_delay_s);
    const std::int64_t processing = to_nanoseconds(processing_delay_s);
    int count = 0;
    for (const auto& p : completed) {
        if (p.tx_end_ns && p.sojourn_ns() + processing >= bound) ++count;
    }
    return count;
}

}  // namespace ranslice
