#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ranslice/dqn_config.hpp"

namespace ranslice {

enum class SliceId : std::uint8_t { E = 0, U = 1, M = 2 };

inline constexpr std::size_t kNumSlices = 3;
inline constexpr std::array<SliceId, kNumSlices> kAllSlices{SliceId::E, SliceId::U, SliceId::M};

template <class T>
using PerSlice = std::array<T, kNumSlices>;

constexpr std::size_t index_of(SliceId s) { return static_cast<std::size_t>(s); }

// "E", "U", "M"
std::string_view slice_key(SliceId s);
// "eMBB", "URLLC", "mMTC"
std::string_view slice_name(SliceId s);
// Accepts both the short key and the long name.
std::optional<SliceId> parse_slice(std::string_view text);

struct Position {
    double x = 0.0;
    double y = 0.0;
};

double distance(Position a, Position b);

struct QosProfile {
    double min_rate_bps = 0.0;
    double max_delay_s = 0.0;
};

struct TrafficProfile {
    double arrival_interval_s = 0.0;
    std::int64_t packet_size_bytes = 0;
};

struct RewardWeights {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

struct ThresholdGrid {
    double tau_min_s = 0.0;
    double tau_max_s = 0.0;
    int steps = 20;
};

struct UserEquipment {
    int id = 0;
    SliceId slice = SliceId::E;
    Position position;
    double speed_mps = 1.0;
    int serving_oru = 0;
};

struct RadioUnit {
    int id = 0;
    Position position;
    double tx_power_w = 0.0;
};

struct ResourceGrid {
    int rbs_per_rbg = 6;
    double rb_bandwidth_hz = 180e3;
    int total_rbgs = 14;
    int symbols_per_tti = 14;
    int subcarriers_per_rb = 12;
    int layers = 1;
    int numerology = 0;
    double tti_s = 1e-3;

    int total_rbs() const { return total_rbgs * rbs_per_rbg; }
};

struct SliceAllocation {
    PerSlice<int> rbgs{};

    int operator[](SliceId s) const { return rbgs[index_of(s)]; }
    int total() const { return rbgs[0] + rbgs[1] + rbgs[2]; }
    // First RBG of the slice's contiguous region at every ORU (slices laid out E, U, M).
    int first_rbg(SliceId s) const;

    friend bool operator==(const SliceAllocation&, const SliceAllocation&) = default;
};

// RBs per ORU available to slice s.
int slice_rb_budget(const SliceAllocation& alloc, const ResourceGrid& grid, SliceId s);

struct Region {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(Position p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

struct ChannelConfig {
    double carrier_hz = 2e9;
    double pathloss_exponent = 3.5;
    double reference_distance_m = 1.0;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 9.0;
    double heading_hold_s = 1.0;
    Region region;
    // Bounds of log10 |h|^2 used to normalize the intra-slice channel features.
    double state_gain_log10_lo = -12.0;
    double state_gain_log10_hi = 0.0;
    // Linear SINR thresholds separating modulation orders 2 | 4 | 6 | 8.
    std::array<double, 3> modulation_thresholds{2.0, 15.0, 80.0};
};

struct SliceProfile {
    QosProfile qos;
    TrafficProfile traffic;
    RewardWeights weights;
    ThresholdGrid thresholds;
    double processing_delay_s = 0.0;
};

struct Cadence {
    int intra_period_ttis = 10;
    int inter_period_ttis = 200;
};

struct ScenarioConfig {
    ResourceGrid grid;
    ChannelConfig channel;
    std::vector<RadioUnit> orus;
    std::vector<UserEquipment> users;
    PerSlice<SliceProfile> slices{};
    DqnConfig intra_agent;
    DqnConfig inter_agent;
    Cadence cadence;
    double duration_s = 50.0;
    std::uint64_t seed = 1;
    SliceAllocation initial_allocation{{5, 5, 4}};
    // Literal QoS test: satisfied iff normalized delay >= 1.
    bool qos_literal = false;
    // Literal reward sign: +alpha * U^max.
    bool reward_literal_sign = false;

    const SliceProfile& slice(SliceId s) const { return slices[index_of(s)]; }
    SliceProfile& slice(SliceId s) { return slices[index_of(s)]; }

    std::int64_t duration_ttis() const;
    std::vector<int> users_of(SliceId s) const;
};

enum class ScenarioErrorKind {
    EmptyUsers,
    EmptySlice,
    NoRadioUnits,
    BadRadioUnit,
    BadServingOru,
    DuplicateUserId,
    NonUniformSpeed,
    BadGrid,
    RbgSumMismatch,
    NonPositiveQos,
    BadTraffic,
    BadThresholdGrid,
    WeightOutOfRange,
    BadCadence,
    BadChannel,
    BadAgentConfig,
};

std::string_view to_string(ScenarioErrorKind kind);

struct ScenarioError {
    ScenarioErrorKind kind;
    std::string detail;
};

class ScenarioInvalid : public std::runtime_error {
public:
    explicit ScenarioInvalid(std::vector<ScenarioError> errors);
    const std::vector<ScenarioError>& errors() const { return errors_; }

private:
    std::vector<ScenarioError> errors_;
};

// Complete list of violated invariants; empty when the scenario is valid.
std::vector<ScenarioError> check_scenario(const ScenarioConfig& cfg);

// Returns the config unchanged if valid, throws ScenarioInvalid otherwise.
const ScenarioConfig& validate_scenario(const ScenarioConfig& cfg);

// Three ORUs on a 500 m equilateral triangle, three users per slice placed
// uniformly in the ORUs' bounding box, QoS/traffic/agent values from the
// reference setup.
ScenarioConfig make_default_scenario();

}  // namespace ranslice
