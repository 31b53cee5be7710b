#include "ranslice/domain.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ranslice/rng.hpp"

namespace ranslice {

std::string_view slice_key(SliceId s) {
    switch (s) {
        case SliceId::E: return "E";
        case SliceId::U: return "U";
        case SliceId::M: return "M";
    }
    return "?";
}

std::string_view slice_name(SliceId s) {
    switch (s) {
        case SliceId::E: return "eMBB";
        case SliceId::U: return "URLLC";
        case SliceId::M: return "mMTC";
    }
    return "?";
}

std::optional<SliceId> parse_slice(std::string_view text) {
    for (SliceId s : kAllSlices) {
        if (text == slice_key(s) || text == slice_name(s)) return s;
    }
    return std::nullopt;
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

int SliceAllocation::first_rbg(SliceId s) const {
    int offset = 0;
    for (std::size_t i = 0; i < index_of(s); ++i) offset += rbgs[i];
    return offset;
}

int slice_rb_budget(const SliceAllocation& alloc, const ResourceGrid& grid, SliceId s) {
    return alloc[s] * grid.rbs_per_rbg;
}

std::int64_t ScenarioConfig::duration_ttis() const {
    return std::llround(duration_s / grid.tti_s);
}

std::vector<int> ScenarioConfig::users_of(SliceId s) const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < users.size(); ++i) {
        if (users[i].slice == s) ids.push_back(static_cast<int>(i));
    }
    return ids;
}

std::string_view to_string(ScenarioErrorKind kind) {
    switch (kind) {
        case ScenarioErrorKind::EmptyUsers: return "EmptyUsers";
        case ScenarioErrorKind::EmptySlice: return "EmptySlice";
        case ScenarioErrorKind::NoRadioUnits: return "NoRadioUnits";
        case ScenarioErrorKind::BadRadioUnit: return "BadRadioUnit";
        case ScenarioErrorKind::BadServingOru: return "BadServingOru";
        case ScenarioErrorKind::DuplicateUserId: return "DuplicateUserId";
        case ScenarioErrorKind::NonUniformSpeed: return "NonUniformSpeed";
        case ScenarioErrorKind::BadGrid: return "BadGrid";
        case ScenarioErrorKind::RbgSumMismatch: return "RbgSumMismatch";
        case ScenarioErrorKind::NonPositiveQos: return "NonPositiveQos";
        case ScenarioErrorKind::BadTraffic: return "BadTraffic";
        case ScenarioErrorKind::BadThresholdGrid: return "BadThresholdGrid";
        case ScenarioErrorKind::WeightOutOfRange: return "WeightOutOfRange";
        case ScenarioErrorKind::BadCadence: return "BadCadence";
        case ScenarioErrorKind::BadChannel: return "BadChannel";
        case ScenarioErrorKind::BadAgentConfig: return "BadAgentConfig";
    }
    return "?";
}

namespace {

std::string join_errors(const std::vector<ScenarioError>& errors) {
    std::ostringstream out;
    out << "invalid scenario (" << errors.size() << " violation" << (errors.size() == 1 ? "" : "s") << ")";
    for (const auto& e : errors) out << "\n  " << to_string(e.kind) << ": " << e.detail;
    return out.str();
}

void check_agent(const DqnConfig& a, std::string_view name, std::vector<ScenarioError>& errors) {
    auto bad = [&](const std::string& what) {
        errors.push_back({ScenarioErrorKind::BadAgentConfig, std::string(name) + ": " + what});
    };
    if (!(a.learning_rate > 0.0)) bad("learning rate must be > 0");
    if (!(a.discount >= 0.0 && a.discount < 1.0)) bad("discount must be in [0, 1)");
    if (a.batch_size < 1) bad("batch size must be >= 1");
    if (a.target_sync_period < 1) bad("target sync period must be >= 1");
    if (a.replay_capacity < a.batch_size) bad("replay capacity must be >= batch size");
    if (!(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0 && a.epsilon_end >= 0.0 && a.epsilon_end <= 1.0))
        bad("epsilon bounds must be in [0, 1]");
    if (!(a.epsilon_decay_fraction >= 0.0 && a.epsilon_decay_fraction <= 1.0))
        bad("epsilon decay fraction must be in [0, 1]");
    if (!(a.momentum >= 0.0 && a.momentum < 1.0)) bad("momentum must be in [0, 1)");
    for (int w : a.hidden_layers) {
        if (w < 1) bad("hidden layer widths must be >= 1");
    }
}

}  // namespace

ScenarioInvalid::ScenarioInvalid(std::vector<ScenarioError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<ScenarioError> check_scenario(const ScenarioConfig& cfg) {
    std::vector<ScenarioError> errors;
    auto add = [&](ScenarioErrorKind k, std::string detail) { errors.push_back({k, std::move(detail)}); };

    const auto& g = cfg.grid;
    if (g.rbs_per_rbg < 1 || g.total_rbgs < 1 || g.symbols_per_tti < 1 || g.subcarriers_per_rb < 1 ||
        g.layers < 1 || !(g.rb_bandwidth_hz > 0.0)) {
        add(ScenarioErrorKind::BadGrid, "grid dimensions must be positive");
    }
    if (g.numerology != 0 || std::abs(g.tti_s - 1e-3) > 1e-12) {
        add(ScenarioErrorKind::BadGrid, "numerology 0 requires a 1 ms TTI");
    }

    const int rbg_sum = cfg.initial_allocation.total();
    if (rbg_sum != g.total_rbgs) {
        add(ScenarioErrorKind::RbgSumMismatch,
            "initial allocation sums to " + std::to_string(rbg_sum) + ", pool has " + std::to_string(g.total_rbgs));
    }
    for (SliceId s : kAllSlices) {
        if (cfg.initial_allocation[s] < 0) {
            add(ScenarioErrorKind::RbgSumMismatch, "negative RBG count for slice " + std::string(slice_key(s)));
        }
    }

    if (cfg.orus.empty()) add(ScenarioErrorKind::NoRadioUnits, "at least one ORU is required");
    for (std::size_t m = 0; m < cfg.orus.size(); ++m) {
        if (!(cfg.orus[m].tx_power_w > 0.0)) {
            add(ScenarioErrorKind::BadRadioUnit, "ORU " + std::to_string(m) + " has non-positive power");
        }
        if (cfg.orus[m].id != static_cast<int>(m)) {
            add(ScenarioErrorKind::BadRadioUnit, "ORU ids must be 0..M-1 in order");
        }
    }

    if (cfg.users.empty()) add(ScenarioErrorKind::EmptyUsers, "scenario has no users");
    std::set<int> ids;
    for (std::size_t k = 0; k < cfg.users.size(); ++k) {
        const auto& u = cfg.users[k];
        if (u.id != static_cast<int>(k) || !ids.insert(u.id).second) {
            add(ScenarioErrorKind::DuplicateUserId, "user ids must be 0..K-1 in order (index " + std::to_string(k) + ")");
        }
        if (u.serving_oru < 0 || u.serving_oru >= static_cast<int>(cfg.orus.size())) {
            add(ScenarioErrorKind::BadServingOru, "user " + std::to_string(u.id) + " serving ORU out of range");
        }
        if (u.speed_mps != cfg.users.front().speed_mps) {
            add(ScenarioErrorKind::NonUniformSpeed, "user " + std::to_string(u.id) + " speed differs from user 0");
        }
        if (u.speed_mps < 0.0) add(ScenarioErrorKind::NonUniformSpeed, "negative speed");
        if (!cfg.channel.region.contains(u.position)) {
            add(ScenarioErrorKind::BadChannel, "user " + std::to_string(u.id) + " outside mobility region");
        }
    }

    for (SliceId s : kAllSlices) {
        const std::string key(slice_key(s));
        const auto& p = cfg.slice(s);
        if (!cfg.users.empty() && cfg.users_of(s).empty()) add(ScenarioErrorKind::EmptySlice, "slice " + key + " has no users");
        if (!(p.qos.min_rate_bps > 0.0) || !(p.qos.max_delay_s > 0.0)) {
            add(ScenarioErrorKind::NonPositiveQos, "slice " + key + " QoS bounds must be > 0");
        }
        if (!(p.traffic.arrival_interval_s > 0.0) || p.traffic.packet_size_bytes <= 0) {
            add(ScenarioErrorKind::BadTraffic, "slice " + key + " traffic interval and size must be > 0");
        }
        if (!(p.thresholds.tau_min_s < p.thresholds.tau_max_s) || p.thresholds.steps < 2 || !(p.thresholds.tau_min_s >= 0.0)) {
            add(ScenarioErrorKind::BadThresholdGrid, "slice " + key + " needs tau_min < tau_max and at least 2 steps");
        }
        for (double w : {p.weights.alpha, p.weights.beta, p.weights.gamma}) {
            if (!(w >= 0.0 && w <= 1.0)) {
                add(ScenarioErrorKind::WeightOutOfRange, "slice " + key + " reward weight outside [0, 1]");
                break;
            }
        }
        if (p.processing_delay_s < 0.0) add(ScenarioErrorKind::BadTraffic, "slice " + key + " negative processing delay");
    }

    const auto& c = cfg.cadence;
    const std::int64_t ttis = cfg.duration_ttis();
    if (c.intra_period_ttis < 1 || c.inter_period_ttis < 1 || ttis < 1) {
        add(ScenarioErrorKind::BadCadence, "cadences and duration must be positive");
    } else if (ttis % c.intra_period_ttis != 0 || ttis % c.inter_period_ttis != 0) {
        add(ScenarioErrorKind::BadCadence, "agent periods must divide the simulated duration");
    } else if (c.inter_period_ttis % c.intra_period_ttis != 0) {
        add(ScenarioErrorKind::BadCadence, "inter period must be a multiple of the intra period");
    }

    const auto& ch = cfg.channel;
    if (!(ch.carrier_hz > 0.0) || !(ch.pathloss_exponent > 0.0) || !(ch.reference_distance_m > 0.0) ||
        !(ch.heading_hold_s > 0.0) || !(ch.region.x_min < ch.region.x_max) || !(ch.region.y_min < ch.region.y_max) ||
        !(ch.state_gain_log10_lo < ch.state_gain_log10_hi) ||
        !(ch.modulation_thresholds[0] <= ch.modulation_thresholds[1] &&
          ch.modulation_thresholds[1] <= ch.modulation_thresholds[2])) {
        add(ScenarioErrorKind::BadChannel, "channel parameters out of range");
    }

    check_agent(cfg.intra_agent, "intra agent", errors);
    check_agent(cfg.inter_agent, "inter agent", errors);
    return errors;
}

const ScenarioConfig& validate_scenario(const ScenarioConfig& cfg) {
    auto errors = check_scenario(cfg);
    if (!errors.empty()) throw ScenarioInvalid(std::move(errors));
    return cfg;
}

ScenarioConfig make_default_scenario() {
    ScenarioConfig cfg;

    const double side = 500.0;
    const double height = side * std::sqrt(3.0) / 2.0;
    const double power_w = std::pow(10.0, (38.0 - 30.0) / 10.0);
    cfg.orus = {
        {0, {0.0, 0.0}, power_w},
        {1, {side, 0.0}, power_w},
        {2, {side / 2.0, height}, power_w},
    };
    cfg.channel.region = {0.0, side, 0.0, height};

    auto& e = cfg.slice(SliceId::E);
    e.qos = {16e6, 10e-3};
    e.traffic = {0.5e-3, 1024};
    e.weights = {0.3, 0.4, 0.3};
    e.thresholds = {2e-3, 10e-3, 20};

    auto& u = cfg.slice(SliceId::U);
    u.qos = {3.8e6, 2e-3};
    u.traffic = {1e-3, 480};
    u.weights = {0.3, 0.3, 0.4};
    u.thresholds = {0.5e-3, 2e-3, 20};

    auto& m = cfg.slice(SliceId::M);
    m.qos = {0.5e6, 20e-3};
    m.traffic = {0.5e-3, 32};
    m.weights = {0.3, 0.35, 0.35};
    m.thresholds = {5e-3, 15e-3, 20};

    cfg.intra_agent.hidden_layers = {64, 64, 256};
    cfg.intra_agent.learning_rate = 1e-3;
    cfg.intra_agent.batch_size = 256;
    cfg.inter_agent.hidden_layers = {256, 256};
    cfg.inter_agent.learning_rate = 1e-4;
    cfg.inter_agent.batch_size = 64;

    // Fixed layout stream so the default file is reproducible; run seeds never touch it.
    Rng layout(20240609);
    int id = 0;
    for (SliceId s : kAllSlices) {
        for (int i = 0; i < 3; ++i) {
            UserEquipment ue;
            ue.id = id++;
            ue.slice = s;
            ue.position = {layout.uniform(0.0, side), layout.uniform(0.0, height)};
            ue.speed_mps = 1.0;
            double best = distance(ue.position, cfg.orus[0].position);
            for (std::size_t o = 1; o < cfg.orus.size(); ++o) {
                const double d = distance(ue.position, cfg.orus[o].position);
                if (d < best) {
                    best = d;
                    ue.serving_oru = static_cast<int>(o);
                }
            }
            cfg.users.push_back(ue);
        }
    }
    return cfg;
}

}  // namespace ranslice
