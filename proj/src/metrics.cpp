#include "ranslice/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace ranslice {

double user_mean_rate(std::span<const double> per_tti_rate_bps) {
    if (per_tti_rate_bps.empty()) throw std::invalid_argument("mean rate over an empty horizon");
    return std::accumulate(per_tti_rate_bps.begin(), per_tti_rate_bps.end(), 0.0) /
           static_cast<double>(per_tti_rate_bps.size());
}

double normalize_rate(double mean_rate_bps, double min_rate_bps) { return mean_rate_bps / min_rate_bps; }

double slice_avg_rate(std::span<const double> normalized_rates) {
    if (normalized_rates.empty()) throw EmptySlice();
    return std::accumulate(normalized_rates.begin(), normalized_rates.end(), 0.0) /
           static_cast<double>(normalized_rates.size());
}

double packet_delay(const Packet& p, double processing_delay_s) {
    if (!p.tx_start_ns || !p.tx_end_ns) throw std::invalid_argument("delay of a packet that has not completed");
    const double queue = static_cast<double>(*p.tx_start_ns - p.arrival_ns) * 1e-9;
    const double tx = static_cast<double>(*p.tx_end_ns - *p.tx_start_ns) * 1e-9;
    return tx + queue + processing_delay_s;
}

std::optional<double> user_mean_delay(std::span<const double> delays_s) {
    if (delays_s.empty()) return std::nullopt;
    return std::accumulate(delays_s.begin(), delays_s.end(), 0.0) / static_cast<double>(delays_s.size());
}

double normalize_delay(double mean_delay_s, double max_delay_s) { return mean_delay_s / max_delay_s; }

SliceDelay slice_avg_delay(std::span<const std::optional<double>> normalized_delays) {
    if (normalized_delays.empty()) throw EmptySlice();
    SliceDelay out;
    double sum = 0.0;
    int n = 0;
    for (const auto& d : normalized_delays) {
        if (d) {
            sum += *d;
            ++n;
        } else {
            ++out.excluded_users;
        }
    }
    out.value = n > 0 ? sum / n : 0.0;
    return out;
}

bool qos_indicator(double rate_norm, std::optional<double> delay_norm, bool literal) {
    if (!delay_norm) return false;
    const bool delay_ok = literal ? *delay_norm >= 1.0 : *delay_norm <= 1.0;
    return rate_norm >= 1.0 && delay_ok;
}

double slice_satisfaction(std::span<const bool> satisfied) {
    if (satisfied.empty()) throw EmptySlice();
    const auto n = std::count(satisfied.begin(), satisfied.end(), true);
    return static_cast<double>(n) / static_cast<double>(satisfied.size());
}

std::vector<EccdfPoint> eccdf(std::span<const double> samples) {
    if (samples.empty()) throw EmptySamples();
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<EccdfPoint> out;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        out.push_back({sorted[i], static_cast<double>(sorted.size() - j) / n});
        i = j;
    }
    return out;
}

double eccdf_at(std::span<const EccdfPoint> table, double value, std::size_t sample_count) {
    if (table.empty() || sample_count == 0) throw EmptySamples();
    auto it = std::upper_bound(table.begin(), table.end(), value,
                               [](double v, const EccdfPoint& p) { return v < p.value; });
    if (it == table.begin()) return 1.0;
    return std::prev(it)->fraction_above;
}

KpiWindow::KpiWindow(const ScenarioConfig& cfg) : users_(cfg.users.size()), qos_literal_(cfg.qos_literal) {
    for (const auto& u : cfg.users) {
        const auto& p = cfg.slice(u.slice);
        info_.push_back({u.slice, p.qos, p.processing_delay_s, to_nanoseconds(p.qos.max_delay_s),
                         to_nanoseconds(p.processing_delay_s)});
    }
}

void KpiWindow::add_completion(int user, const Packet& p) {
    auto& acc = users_[user];
    const auto& info = info_[user];
    acc.delay_sum_s += packet_delay(p, info.processing_s);
    ++acc.completed;
    if (p.sojourn_ns() + info.processing_ns >= info.max_delay_ns) ++acc.expired;
}

PerSlice<SliceKpi> KpiWindow::close(const PerSlice<double>& umax_capacity) {
    PerSlice<SliceKpi> out{};
    PerSlice<std::vector<double>> rate_norms;
    PerSlice<std::vector<std::optional<double>>> delay_norms;
    PerSlice<std::vector<char>> satisfied;
    PerSlice<double> raw_delay_sum{};

    const int ttis = std::max(ttis_, 1);
    for (std::size_t k = 0; k < users_.size(); ++k) {
        const auto& acc = users_[k];
        const auto& info = info_[k];
        const std::size_t s = index_of(info.slice);
        const double mean_rate = acc.rate_sum_bps / ttis;
        const double r_norm = normalize_rate(mean_rate, info.qos.min_rate_bps);
        std::optional<double> d_norm;
        if (acc.completed > 0) {
            const double mean_delay = acc.delay_sum_s / acc.completed;
            d_norm = normalize_delay(mean_delay, info.qos.max_delay_s);
            raw_delay_sum[s] += mean_delay;
        }
        rate_norms[s].push_back(r_norm);
        delay_norms[s].push_back(d_norm);
        satisfied[s].push_back(qos_indicator(r_norm, d_norm, qos_literal_));
        out[s].r_raw_bps += mean_rate;
        out[s].epsilon += acc.expired;
        out[s].completed += acc.completed;
    }

    for (SliceId sid : kAllSlices) {
        const std::size_t s = index_of(sid);
        auto& kpi = out[s];
        if (!rate_norms[s].empty()) {
            kpi.r_avg = slice_avg_rate(rate_norms[s]);
            const SliceDelay d = slice_avg_delay(delay_norms[s]);
            kpi.d_avg = d.value;
            kpi.users_without_completions = d.excluded_users;
            const int with_delay = static_cast<int>(delay_norms[s].size()) - d.excluded_users;
            kpi.has_delay = with_delay > 0;
            kpi.d_raw_s = with_delay > 0 ? raw_delay_sum[s] / with_delay : 0.0;
            const std::size_t n = satisfied[s].size();
            auto flags = std::make_unique<bool[]>(n);
            std::copy(satisfied[s].begin(), satisfied[s].end(), flags.get());
            kpi.p_bar = slice_satisfaction({flags.get(), n});
        }
        const DeviationReport dev = utilization_[s].close_window();
        kpi.umax = dev.umax;
        kpi.umax_mean = dev.mean;
        kpi.delta = dev.delta;
        kpi.zero_mean = dev.zero_mean;
        kpi.umax_norm = umax_capacity[s] > 0.0 ? dev.umax / umax_capacity[s] : 0.0;
        kpi.epsilon_norm = kpi.completed > 0 ? static_cast<double>(kpi.epsilon) / kpi.completed : 0.0;
    }

    for (auto& acc : users_) acc = UserAcc{};
    ttis_ = 0;
    return out;
}

}  // namespace ranslice
