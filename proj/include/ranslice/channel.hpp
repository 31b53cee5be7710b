#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranslice/domain.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

class NonPositiveDistance : public std::domain_error {
public:
    NonPositiveDistance() : std::domain_error("pathloss requires a positive distance") {}
};

// Free-space loss at the reference distance, in dB.
double reference_pathloss_db(const ChannelConfig& ch);

// Log-distance model anchored at free space: PL0 + 10 * eta * log10(d / d0).
double pathloss_db(double distance_m, const ChannelConfig& ch);

// Circularly-symmetric complex Gaussian with E[|h|^2] = 1.
std::complex<double> sample_fading(Rng& rng);

// W_RB * log2(1 + sinr)
double rb_rate(double sinr, double rb_bandwidth_hz);

double sinr_from(double signal_w, double interference_w, double noise_w);

// Sum of received powers from every active ORU other than the serving one.
double interference_sum(std::span<const double> rx_power_w, std::span<const std::uint8_t> active, int serving_oru);

// Thermal noise over one resource block.
double noise_per_rb_w(const ChannelConfig& ch, const ResourceGrid& grid);

// Which ORU transmits on which RB during one TTI.
class RbUsage {
public:
    RbUsage() = default;
    RbUsage(int orus, int rbs) : orus_(orus), rbs_(rbs), active_(static_cast<std::size_t>(orus) * rbs, 0) {}

    int orus() const { return orus_; }
    int rbs() const { return rbs_; }
    bool active(int oru, int rb) const { return active_[index(oru, rb)] != 0; }
    void set(int oru, int rb, bool on = true) { active_[index(oru, rb)] = on ? 1 : 0; }
    void clear() { std::fill(active_.begin(), active_.end(), std::uint8_t{0}); }
    int count(int oru) const;

private:
    std::size_t index(int oru, int rb) const { return static_cast<std::size_t>(oru) * rbs_ + rb; }

    int orus_ = 0;
    int rbs_ = 0;
    std::vector<std::uint8_t> active_;
};

struct UserMotion {
    Position position;
    double heading_rad = 0.0;
    double speed_mps = 0.0;
    double since_redraw_s = 0.0;
};

// Random-direction mobility with a reflecting rectangular boundary.
class MobilityState {
public:
    MobilityState(std::vector<UserMotion> users, Region region, double heading_hold_s);
    MobilityState(const ScenarioConfig& cfg, Rng& rng);

    void step(double dt_s, Rng& rng);

    const std::vector<UserMotion>& users() const { return users_; }
    const Region& region() const { return region_; }

private:
    std::vector<UserMotion> users_;
    Region region_;
    double heading_hold_s_;
};

// Per (user, ORU) large- and small-scale channel plus transmit power and noise.
class ChannelState {
public:
    explicit ChannelState(const ScenarioConfig& cfg);

    // Recomputes pathloss from positions and redraws block fading for every link.
    void update(std::span<const UserMotion> users, Rng& fading_rng);

    int users() const { return users_; }
    int orus() const { return orus_; }

    double pathloss_db(int user, int oru) const { return pathloss_db_[at(user, oru)]; }
    std::complex<double> fading(int user, int oru) const { return fading_[at(user, oru)]; }
    // |h|^2 including pathloss (linear).
    double gain(int user, int oru) const { return gain_[at(user, oru)]; }
    double rb_power_w(int oru) const { return rb_power_w_[oru]; }
    double noise_w() const { return noise_w_; }
    int rbs_per_oru() const { return rbs_per_oru_; }

    // Test hook: overrides the composite gain of one link.
    void set_gain(int user, int oru, double gain_linear) { gain_[at(user, oru)] = gain_linear; }

    double interference(int user, int serving_oru, int rb, const RbUsage& usage) const;
    double sinr(int user, int oru, int rb, const RbUsage& usage) const;

    // Serving ORU per user by minimum pathloss; ties go to the lower index.
    std::vector<int> best_servers() const;

private:
    std::size_t at(int user, int oru) const { return static_cast<std::size_t>(user) * orus_ + oru; }

    ChannelConfig config_;
    std::vector<Position> oru_positions_;
    int users_;
    int orus_;
    int rbs_per_oru_;
    std::vector<double> pathloss_db_;
    std::vector<std::complex<double>> fading_;
    std::vector<double> gain_;
    std::vector<double> rb_power_w_;
    double noise_w_;
};

// Recomputes serving ORUs in-place; returns the number of users that moved.
int reassociate_users(std::vector<UserEquipment>& users, const ChannelState& channel);

}  // namespace ranslice
