#include "ranslice/config_io.hpp"

#include <fstream>
#include <sstream>

namespace ranslice {

using nlohmann::json;

namespace {

json agent_to_json(const DqnConfig& a) {
    return {
        {"hidden_layers", a.hidden_layers},
        {"learning_rate", a.learning_rate},
        {"discount", a.discount},
        {"batch_size", a.batch_size},
        {"target_sync_period", a.target_sync_period},
        {"epsilon_start", a.epsilon_start},
        {"epsilon_end", a.epsilon_end},
        {"epsilon_decay_fraction", a.epsilon_decay_fraction},
        {"replay_capacity", a.replay_capacity},
        {"momentum", a.momentum},
    };
}

DqnConfig agent_from_json(const json& j) {
    DqnConfig a;
    a.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
    a.learning_rate = j.at("learning_rate").get<double>();
    a.discount = j.at("discount").get<double>();
    a.batch_size = j.at("batch_size").get<int>();
    a.target_sync_period = j.at("target_sync_period").get<int>();
    a.epsilon_start = j.at("epsilon_start").get<double>();
    a.epsilon_end = j.at("epsilon_end").get<double>();
    a.epsilon_decay_fraction = j.at("epsilon_decay_fraction").get<double>();
    a.replay_capacity = j.at("replay_capacity").get<int>();
    a.momentum = j.at("momentum").get<double>();
    return a;
}

json position_json(Position p) { return {{"x", p.x}, {"y", p.y}}; }

Position position_from(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

// Every key of `given` must exist in `reference`; arrays of objects are checked
// against the reference's first element.
void reject_unknown(const json& given, const json& reference, const std::string& path) {
    if (given.is_object()) {
        if (!reference.is_object()) throw ConfigError("'" + path + "' must not be an object");
        for (auto it = given.begin(); it != given.end(); ++it) {
            const std::string child = path.empty() ? it.key() : path + "." + it.key();
            if (!reference.contains(it.key())) throw ConfigError("unknown config key '" + child + "'");
            reject_unknown(it.value(), reference.at(it.key()), child);
        }
    } else if (given.is_array() && reference.is_array() && !reference.empty() && reference.front().is_object()) {
        for (std::size_t i = 0; i < given.size(); ++i) {
            reject_unknown(given[i], reference.front(), path + "[" + std::to_string(i) + "]");
        }
    }
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    const auto& g = cfg.grid;
    j["grid"] = {
        {"rbs_per_rbg", g.rbs_per_rbg},
        {"rb_bandwidth_hz", g.rb_bandwidth_hz},
        {"total_rbgs", g.total_rbgs},
        {"symbols_per_tti", g.symbols_per_tti},
        {"subcarriers_per_rb", g.subcarriers_per_rb},
        {"layers", g.layers},
        {"numerology", g.numerology},
        {"tti_s", g.tti_s},
    };
    const auto& c = cfg.channel;
    j["channel"] = {
        {"carrier_hz", c.carrier_hz},
        {"pathloss_exponent", c.pathloss_exponent},
        {"reference_distance_m", c.reference_distance_m},
        {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
        {"noise_figure_db", c.noise_figure_db},
        {"heading_hold_s", c.heading_hold_s},
        {"region", {{"x_min", c.region.x_min}, {"x_max", c.region.x_max}, {"y_min", c.region.y_min}, {"y_max", c.region.y_max}}},
        {"state_gain_log10_lo", c.state_gain_log10_lo},
        {"state_gain_log10_hi", c.state_gain_log10_hi},
        {"modulation_thresholds", c.modulation_thresholds},
    };
    j["orus"] = json::array();
    for (const auto& o : cfg.orus) {
        j["orus"].push_back({{"id", o.id}, {"position", position_json(o.position)}, {"tx_power_w", o.tx_power_w}});
    }
    j["users"] = json::array();
    for (const auto& u : cfg.users) {
        j["users"].push_back({{"id", u.id},
                              {"slice", std::string(slice_key(u.slice))},
                              {"position", position_json(u.position)},
                              {"speed_mps", u.speed_mps},
                              {"serving_oru", u.serving_oru}});
    }
    for (SliceId s : kAllSlices) {
        const auto& p = cfg.slice(s);
        j["slices"][std::string(slice_key(s))] = {
            {"qos", {{"min_rate_bps", p.qos.min_rate_bps}, {"max_delay_s", p.qos.max_delay_s}}},
            {"traffic", {{"arrival_interval_s", p.traffic.arrival_interval_s}, {"packet_size_bytes", p.traffic.packet_size_bytes}}},
            {"weights", {{"alpha", p.weights.alpha}, {"beta", p.weights.beta}, {"gamma", p.weights.gamma}}},
            {"threshold_grid", {{"tau_min_s", p.thresholds.tau_min_s}, {"tau_max_s", p.thresholds.tau_max_s}, {"steps", p.thresholds.steps}}},
            {"processing_delay_s", p.processing_delay_s},
        };
        j["initial_allocation"][std::string(slice_key(s))] = cfg.initial_allocation[s];
    }
    j["intra_agent"] = agent_to_json(cfg.intra_agent);
    j["inter_agent"] = agent_to_json(cfg.inter_agent);
    j["cadence"] = {{"intra_period_ttis", cfg.cadence.intra_period_ttis}, {"inter_period_ttis", cfg.cadence.inter_period_ttis}};
    j["duration_s"] = cfg.duration_s;
    j["seed"] = cfg.seed;
    j["flags"] = {{"qos_literal", cfg.qos_literal}, {"reward_literal_sign", cfg.reward_literal_sign}};
    return j;
}

ScenarioConfig scenario_from_json(const json& given) {
    if (!given.is_object()) throw ConfigError("scenario config must be an object");
    json merged = scenario_to_json(make_default_scenario());
    reject_unknown(given, merged, "");
    merged.merge_patch(given);

    try {
        ScenarioConfig cfg;
        const auto& g = merged.at("grid");
        cfg.grid.rbs_per_rbg = g.at("rbs_per_rbg").get<int>();
        cfg.grid.rb_bandwidth_hz = g.at("rb_bandwidth_hz").get<double>();
        cfg.grid.total_rbgs = g.at("total_rbgs").get<int>();
        cfg.grid.symbols_per_tti = g.at("symbols_per_tti").get<int>();
        cfg.grid.subcarriers_per_rb = g.at("subcarriers_per_rb").get<int>();
        cfg.grid.layers = g.at("layers").get<int>();
        cfg.grid.numerology = g.at("numerology").get<int>();
        cfg.grid.tti_s = g.at("tti_s").get<double>();

        const auto& c = merged.at("channel");
        cfg.channel.carrier_hz = c.at("carrier_hz").get<double>();
        cfg.channel.pathloss_exponent = c.at("pathloss_exponent").get<double>();
        cfg.channel.reference_distance_m = c.at("reference_distance_m").get<double>();
        cfg.channel.noise_psd_dbm_hz = c.at("noise_psd_dbm_hz").get<double>();
        cfg.channel.noise_figure_db = c.at("noise_figure_db").get<double>();
        cfg.channel.heading_hold_s = c.at("heading_hold_s").get<double>();
        const auto& r = c.at("region");
        cfg.channel.region = {r.at("x_min").get<double>(), r.at("x_max").get<double>(), r.at("y_min").get<double>(),
                              r.at("y_max").get<double>()};
        cfg.channel.state_gain_log10_lo = c.at("state_gain_log10_lo").get<double>();
        cfg.channel.state_gain_log10_hi = c.at("state_gain_log10_hi").get<double>();
        cfg.channel.modulation_thresholds = c.at("modulation_thresholds").get<std::array<double, 3>>();

        for (const auto& o : merged.at("orus")) {
            cfg.orus.push_back({o.at("id").get<int>(), position_from(o.at("position")), o.at("tx_power_w").get<double>()});
        }
        for (const auto& u : merged.at("users")) {
            UserEquipment ue;
            ue.id = u.at("id").get<int>();
            const auto name = u.at("slice").get<std::string>();
            const auto slice = parse_slice(name);
            if (!slice) throw ConfigError("unknown slice '" + name + "' for user " + std::to_string(ue.id));
            ue.slice = *slice;
            ue.position = position_from(u.at("position"));
            ue.speed_mps = u.at("speed_mps").get<double>();
            ue.serving_oru = u.at("serving_oru").get<int>();
            cfg.users.push_back(ue);
        }
        for (SliceId s : kAllSlices) {
            const auto& p = merged.at("slices").at(std::string(slice_key(s)));
            auto& out = cfg.slice(s);
            out.qos = {p.at("qos").at("min_rate_bps").get<double>(), p.at("qos").at("max_delay_s").get<double>()};
            out.traffic = {p.at("traffic").at("arrival_interval_s").get<double>(),
                           p.at("traffic").at("packet_size_bytes").get<std::int64_t>()};
            out.weights = {p.at("weights").at("alpha").get<double>(), p.at("weights").at("beta").get<double>(),
                           p.at("weights").at("gamma").get<double>()};
            const auto& t = p.at("threshold_grid");
            out.thresholds = {t.at("tau_min_s").get<double>(), t.at("tau_max_s").get<double>(), t.at("steps").get<int>()};
            out.processing_delay_s = p.at("processing_delay_s").get<double>();
            cfg.initial_allocation.rbgs[index_of(s)] = merged.at("initial_allocation").at(std::string(slice_key(s))).get<int>();
        }
        cfg.intra_agent = agent_from_json(merged.at("intra_agent"));
        cfg.inter_agent = agent_from_json(merged.at("inter_agent"));
        cfg.cadence.intra_period_ttis = merged.at("cadence").at("intra_period_ttis").get<int>();
        cfg.cadence.inter_period_ttis = merged.at("cadence").at("inter_period_ttis").get<int>();
        cfg.duration_s = merged.at("duration_s").get<double>();
        cfg.seed = merged.at("seed").get<std::uint64_t>();
        cfg.qos_literal = merged.at("flags").at("qos_literal").get<bool>();
        cfg.reward_literal_sign = merged.at("flags").at("reward_literal_sign").get<bool>();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed scenario config: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::string dump_scenario(const ScenarioConfig& cfg) { return scenario_to_json(cfg).dump(2) + "\n"; }

}  // namespace ranslice
