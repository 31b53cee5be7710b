#include "ranslice/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ranslice {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

double reference_pathloss_db(const ChannelConfig& ch) {
    return 20.0 * std::log10(4.0 * std::numbers::pi * ch.reference_distance_m * ch.carrier_hz / kSpeedOfLight);
}

double pathloss_db(double distance_m, const ChannelConfig& ch) {
    if (!(distance_m > 0.0)) throw NonPositiveDistance();
    return reference_pathloss_db(ch) + 10.0 * ch.pathloss_exponent * std::log10(distance_m / ch.reference_distance_m);
}

std::complex<double> sample_fading(Rng& rng) {
    const double scale = std::numbers::sqrt2 / 2.0;
    const double re = rng.normal() * scale;
    const double im = rng.normal() * scale;
    return {re, im};
}

double rb_rate(double sinr, double rb_bandwidth_hz) { return rb_bandwidth_hz * std::log2(1.0 + sinr); }

double sinr_from(double signal_w, double interference_w, double noise_w) {
    return signal_w / (interference_w + noise_w);
}

double interference_sum(std::span<const double> rx_power_w, std::span<const std::uint8_t> active, int serving_oru) {
    double total = 0.0;
    for (std::size_t m = 0; m < rx_power_w.size(); ++m) {
        if (static_cast<int>(m) == serving_oru || !active[m]) continue;
        total += rx_power_w[m];
    }
    return total;
}

double noise_per_rb_w(const ChannelConfig& ch, const ResourceGrid& grid) {
    const double dbm = ch.noise_psd_dbm_hz + ch.noise_figure_db + 10.0 * std::log10(grid.rb_bandwidth_hz);
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

int RbUsage::count(int oru) const {
    int n = 0;
    for (int rb = 0; rb < rbs_; ++rb) n += active(oru, rb) ? 1 : 0;
    return n;
}

MobilityState::MobilityState(std::vector<UserMotion> users, Region region, double heading_hold_s)
    : users_(std::move(users)), region_(region), heading_hold_s_(heading_hold_s) {}

MobilityState::MobilityState(const ScenarioConfig& cfg, Rng& rng)
    : region_(cfg.channel.region), heading_hold_s_(cfg.channel.heading_hold_s) {
    users_.reserve(cfg.users.size());
    for (const auto& u : cfg.users) {
        users_.push_back({u.position, rng.uniform(0.0, 2.0 * std::numbers::pi), u.speed_mps, 0.0});
    }
}

void MobilityState::step(double dt_s, Rng& rng) {
    for (auto& u : users_) {
        auto& p = u.position;
        p.x += u.speed_mps * dt_s * std::cos(u.heading_rad);
        p.y += u.speed_mps * dt_s * std::sin(u.heading_rad);
        if (p.x < region_.x_min) {
            p.x = 2.0 * region_.x_min - p.x;
            u.heading_rad = std::numbers::pi - u.heading_rad;
        } else if (p.x > region_.x_max) {
            p.x = 2.0 * region_.x_max - p.x;
            u.heading_rad = std::numbers::pi - u.heading_rad;
        }
        if (p.y < region_.y_min) {
            p.y = 2.0 * region_.y_min - p.y;
            u.heading_rad = -u.heading_rad;
        } else if (p.y > region_.y_max) {
            p.y = 2.0 * region_.y_max - p.y;
            u.heading_rad = -u.heading_rad;
        }
        // A step longer than the region itself cannot be reflected once.
        p.x = std::clamp(p.x, region_.x_min, region_.x_max);
        p.y = std::clamp(p.y, region_.y_min, region_.y_max);

        u.since_redraw_s += dt_s;
        if (u.since_redraw_s >= heading_hold_s_ - 1e-12) {
            u.since_redraw_s = 0.0;
            u.heading_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }
}

ChannelState::ChannelState(const ScenarioConfig& cfg)
    : config_(cfg.channel),
      users_(static_cast<int>(cfg.users.size())),
      orus_(static_cast<int>(cfg.orus.size())),
      rbs_per_oru_(cfg.grid.total_rbs()),
      pathloss_db_(cfg.users.size() * cfg.orus.size(), 0.0),
      fading_(cfg.users.size() * cfg.orus.size(), {1.0, 0.0}),
      gain_(cfg.users.size() * cfg.orus.size(), 0.0),
      noise_w_(noise_per_rb_w(cfg.channel, cfg.grid)) {
    for (const auto& o : cfg.orus) {
        oru_positions_.push_back(o.position);
        rb_power_w_.push_back(o.tx_power_w / rbs_per_oru_);
    }
    for (int k = 0; k < users_; ++k) {
        for (int m = 0; m < orus_; ++m) {
            const double d = std::max(distance(cfg.users[k].position, oru_positions_[m]), config_.reference_distance_m);
            pathloss_db_[at(k, m)] = ranslice::pathloss_db(d, config_);
            gain_[at(k, m)] = std::pow(10.0, -pathloss_db_[at(k, m)] / 10.0);
        }
    }
}

void ChannelState::update(std::span<const UserMotion> users, Rng& fading_rng) {
    for (int k = 0; k < users_; ++k) {
        for (int m = 0; m < orus_; ++m) {
            // Closer than the reference distance is treated as the reference distance.
            const double d = std::max(distance(users[k].position, oru_positions_[m]), config_.reference_distance_m);
            const double pl = ranslice::pathloss_db(d, config_);
            const auto h = sample_fading(fading_rng);
            pathloss_db_[at(k, m)] = pl;
            fading_[at(k, m)] = h;
            gain_[at(k, m)] = std::norm(h) * std::pow(10.0, -pl / 10.0);
        }
    }
}

double ChannelState::interference(int user, int serving_oru, int rb, const RbUsage& usage) const {
    double total = 0.0;
    for (int m = 0; m < orus_; ++m) {
        if (m == serving_oru || !usage.active(m, rb)) continue;
        total += rb_power_w_[m] * gain_[at(user, m)];
    }
    return total;
}

double ChannelState::sinr(int user, int oru, int rb, const RbUsage& usage) const {
    return sinr_from(rb_power_w_[oru] * gain_[at(user, oru)], interference(user, oru, rb, usage), noise_w_);
}

std::vector<int> ChannelState::best_servers() const {
    std::vector<int> best(users_, 0);
    for (int k = 0; k < users_; ++k) {
        for (int m = 1; m < orus_; ++m) {
            if (pathloss_db_[at(k, m)] < pathloss_db_[at(k, best[k])]) best[k] = m;
        }
    }
    return best;
}

int reassociate_users(std::vector<UserEquipment>& users, const ChannelState& channel) {
    const auto best = channel.best_servers();
    int moved = 0;
    for (std::size_t k = 0; k < users.size(); ++k) {
        if (users[k].serving_oru != best[k]) {
            users[k].serving_oru = best[k];
            ++moved;
        }
    }
    return moved;
}

}  // namespace ranslice
