#include "ranslice/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>

#include "ranslice/agents.hpp"
#include "ranslice/channel.hpp"
#include "ranslice/drl.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Proposed: return "proposed";
        case RunMode::Tddqn: return "tddqn";
        case RunMode::FixedThreshold: return "fixed-threshold";
        case RunMode::FixedAllocation: return "fixed-allocation";
    }
    return "?";
}

std::optional<RunMode> parse_run_mode(std::string_view text) {
    for (RunMode m : {RunMode::Proposed, RunMode::Tddqn, RunMode::FixedThreshold, RunMode::FixedAllocation}) {
        if (text == to_string(m)) return m;
    }
    return std::nullopt;
}

namespace {

std::string intra_agent_name(SliceId s) { return "intra_" + std::string(slice_key(s)); }
constexpr std::string_view kInterAgentName = "inter";

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::string_view agent) {
    return dir / (std::string(agent) + ".ckpt");
}

class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, const RunOptions& opts)
        : cfg_(validate_scenario(cfg)),
          opts_(opts),
          seed_(opts.seed.value_or(cfg.seed)),
          tti_ns_(to_nanoseconds(cfg.grid.tti_s)),
          total_ttis_(cfg.duration_ttis()),
          mobility_rng_(Rng::stream(seed_, "mobility")),
          fading_rng_(Rng::stream(seed_, "fading")),
          mobility_(cfg_, mobility_rng_),
          channel_(cfg_),
          traffic_(cfg_),
          buffers_(cfg_.users.size()),
          allocation_(cfg_.initial_allocation),
          inter_actions_(enumerate_rbg_actions(cfg_.grid.total_rbgs, static_cast<int>(kNumSlices))),
          intra_window_(cfg_),
          inter_window_(cfg_),
          prev_usage_(static_cast<int>(cfg_.orus.size()), cfg_.grid.total_rbs()),
          usage_(static_cast<int>(cfg_.orus.size()), cfg_.grid.total_rbs()) {
        record_.mode = opts.mode;
        record_.seed = seed_;

        const bool intra_learning = opts.mode != RunMode::FixedThreshold;
        const bool inter_learning = opts.mode != RunMode::FixedAllocation;
        const std::int64_t intra_invocations = total_ttis_ / cfg_.cadence.intra_period_ttis;
        const std::int64_t inter_invocations = total_ttis_ / cfg_.cadence.inter_period_ttis;

        for (SliceId s : kAllSlices) {
            const std::size_t i = index_of(s);
            grids_[i] = IntraActionGrid(cfg_.slice(s).thresholds);
            builders_[i] = std::make_unique<IntraStateBuilder>(cfg_, s);
            slice_users_[i] = cfg_.users_of(s);
            const auto& t = cfg_.slice(s).thresholds;
            tau_[i] = 0.5 * (t.tau_min_s + t.tau_max_s);
            if (intra_learning) {
                const std::string name = intra_agent_name(s);
                DqnLearner learner(builders_[i]->dimension(), grids_[i]->size(), cfg_.intra_agent, intra_invocations,
                                   streams_for(name));
                intra_[i] = std::make_unique<WindowAgent>(name, std::move(learner));
            }
        }
        if (inter_learning) {
            const std::string name(kInterAgentName);
            DqnLearner learner(static_cast<int>(4 * kNumSlices), static_cast<int>(inter_actions_.size()), cfg_.inter_agent,
                               inter_invocations, streams_for(name));
            inter_ = std::make_unique<WindowAgent>(name, std::move(learner));
        }
        if (opts.load_agents) load_agents(*opts.load_agents);
    }

    RunRecord run() {
        const auto started = std::chrono::steady_clock::now();
        for (std::int64_t t = 0; t < total_ttis_; ++t) tick(t);
        close_intra_window(total_ttis_, /*invoke_agents=*/false);
        close_inter_window(total_ttis_);
        finish_counters();
        if (opts_.save_agents) save_agents(*opts_.save_agents);
        record_.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return std::move(record_);
    }

    void save_agents(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        auto save_one = [&](const WindowAgent& agent) {
            std::ofstream out(checkpoint_path(dir, agent.name()), std::ios::binary);
            if (!out) throw std::runtime_error("cannot write checkpoint in " + dir.string());
            agent.learner().save(out);
        };
        for (const auto& a : intra_) {
            if (a) save_one(*a);
        }
        if (inter_) save_one(*inter_);
    }

private:
    DqnLearner::Streams streams_for(const std::string& agent) const {
        return {Rng::stream(seed_, "agent." + agent + ".init"), Rng::stream(seed_, "agent." + agent + ".explore"),
                Rng::stream(seed_, "agent." + agent + ".replay")};
    }

    void load_agents(const std::filesystem::path& dir) {
        auto load_one = [&](WindowAgent& agent) {
            std::ifstream in(checkpoint_path(dir, agent.name()), std::ios::binary);
            if (!in) throw std::runtime_error("missing checkpoint " + checkpoint_path(dir, agent.name()).string());
            agent.learner().load(in);
        };
        for (auto& a : intra_) {
            if (a) load_one(*a);
        }
        if (inter_) load_one(*inter_);
    }

    PerSlice<double> umax_capacity() const {
        PerSlice<double> cap{};
        for (SliceId s : kAllSlices) {
            cap[index_of(s)] = static_cast<double>(cfg_.orus.size()) * slice_rb_budget(allocation_, cfg_.grid, s) *
                               cfg_.grid.symbols_per_tti * cfg_.grid.layers * 8.0;
        }
        return cap;
    }

    void tick(std::int64_t t) {
        if (t > 0) mobility_.step(cfg_.grid.tti_s, mobility_rng_);
        channel_.update(mobility_.users(), fading_rng_);

        if (t % cfg_.cadence.inter_period_ttis == 0) {
            if (t > 0) close_inter_window(t);
            record_.counters.reassociations += reassociate_users(cfg_.users, channel_);
            record_.allocations.push_back(allocation_);
        }
        if (t % cfg_.cadence.intra_period_ttis == 0) {
            if (t > 0) close_intra_window(t, true);
            else invoke_intra_agents(t, std::nullopt);
        }

        for (auto& p : traffic_.generate_arrivals(t)) buffers_[static_cast<std::size_t>(p.owner)].push(std::move(p));

        schedule_and_transmit(t);
    }

    void schedule_and_transmit(std::int64_t t) {
        const std::int64_t now_ns = t * tti_ns_;
        const int orus = static_cast<int>(cfg_.orus.size());
        ChannelLinkModel link(channel_, prev_usage_, cfg_.grid, cfg_.channel.modulation_thresholds);
        usage_.clear();
        grants_.clear();
        grant_slices_.clear();
        PerSlice<double> util{};

        std::vector<int> rbs_per_oru(static_cast<std::size_t>(orus), 0);
        for (SliceId s : kAllSlices) {
            const std::size_t i = index_of(s);
            std::vector<SliceUserView> views;
            for (int k : slice_users_[i]) {
                views.push_back({k, cfg_.users[static_cast<std::size_t>(k)].serving_oru, &buffers_[static_cast<std::size_t>(k)]});
            }
            ScheduleRequest req{s, tau_[i], allocation_[s], allocation_.first_rbg(s), orus, now_ns};
            auto grants = schedule_slice(req, views, link, cfg_.grid);

            std::vector<int> slice_rbs(static_cast<std::size_t>(orus), 0);
            for (const auto& g : grants) {
                for (int rb = g.first_rb; rb < g.first_rb + g.rbs; ++rb) usage_.set(g.oru, rb);
                slice_rbs[static_cast<std::size_t>(g.oru)] += g.rbs;
                rbs_per_oru[static_cast<std::size_t>(g.oru)] += g.rbs;
            }
            for (int m = 0; m < orus; ++m) {
                if (slice_rbs[static_cast<std::size_t>(m)] > slice_rb_budget(allocation_, cfg_.grid, s)) {
                    ++record_.counters.rb_violations;
                }
            }
            util[i] = utilization(grants, cfg_.grid);
            intra_window_.add_utilization(s, util[i]);
            inter_window_.add_utilization(s, util[i]);
            for (auto& g : grants) {
                grants_.push_back(g);
                grant_slices_.push_back(s);
            }
        }
        for (int m = 0; m < orus; ++m) {
            const int used = rbs_per_oru[static_cast<std::size_t>(m)];
            record_.counters.max_rbs_granted = std::max<std::int64_t>(record_.counters.max_rbs_granted, used);
            if (used > cfg_.grid.total_rbs() || used != usage_.count(m)) ++record_.counters.rb_violations;
        }

        std::vector<std::int64_t> bits(cfg_.users.size(), 0);
        std::vector<double> rate(cfg_.users.size(), 0.0);
        for (const auto& g : grants_) {
            bits[static_cast<std::size_t>(g.user)] += g.bits;
            rate[static_cast<std::size_t>(g.user)] += g.shannon_rate_bps;
        }
        for (std::size_t k = 0; k < cfg_.users.size(); ++k) {
            intra_window_.add_rate(static_cast<int>(k), rate[k]);
            inter_window_.add_rate(static_cast<int>(k), rate[k]);
            if (bits[k] == 0) continue;
            for (const auto& p : buffers_[k].drain(bits[k], now_ns, tti_ns_)) {
                intra_window_.add_completion(static_cast<int>(k), p);
                inter_window_.add_completion(static_cast<int>(k), p);
            }
        }
        intra_window_.end_tti();
        inter_window_.end_tti();

        if (opts_.observer) opts_.observer(TtiSnapshot{t, allocation_, grants_, grant_slices_, util});
        if (opts_.grant_trace) trace_grants(t);
        if (opts_.channel_trace) trace_channel(t);
        std::swap(prev_usage_, usage_);
        ++record_.counters.ttis;
    }

    void close_intra_window(std::int64_t t, bool invoke_agents) {
        const auto kpis = intra_window_.close(umax_capacity());
        const std::int64_t window = t / cfg_.cadence.intra_period_ttis - 1;
        for (SliceId s : kAllSlices) {
            record_.windows.push_back({window, s, kpis[index_of(s)], tau_[index_of(s)], allocation_[s]});
        }
        ++record_.counters.intra_windows;
        if (invoke_agents) invoke_intra_agents(t, kpis);
    }

    void invoke_intra_agents(std::int64_t t, const std::optional<PerSlice<SliceKpi>>& closed) {
        for (SliceId s : kAllSlices) {
            const std::size_t i = index_of(s);
            if (!intra_[i]) continue;
            std::optional<double> reward;
            if (closed) {
                const auto sig = signals_of((*closed)[i]);
                const auto& w = cfg_.slice(s).weights;
                reward = opts_.mode == RunMode::Tddqn ? tddqn_reward(w, sig)
                                                      : intra_reward(w, sig, cfg_.reward_literal_sign);
            }
            auto step = intra_[i]->step(builders_[i]->build(channel_, buffers_), reward);
            tau_[i] = grids_[i]->threshold_of(step.action);
            ++record_.counters.intra_invocations[i];
            record_.agent_log.push_back({t / cfg_.cadence.intra_period_ttis, intra_[i]->name(), step.epsilon, step.action,
                                         step.reward, step.loss});
        }
    }

    void close_inter_window(std::int64_t t) {
        const auto kpis = inter_window_.close(umax_capacity());
        ++record_.counters.inter_windows;
        if (!inter_) return;
        std::optional<double> reward;
        if (record_.counters.inter_invocations > 0) reward = inter_reward(kpis);
        auto step = inter_->step(build_inter_state(kpis), reward);
        ++record_.counters.inter_invocations;
        record_.agent_log.push_back({t / cfg_.cadence.intra_period_ttis, inter_->name(), step.epsilon, step.action,
                                     step.reward, step.loss});
        // Takes effect from the next TTI; the final decision of a run is never applied.
        if (t < total_ttis_) allocation_ = apply_reconfiguration(inter_actions_[static_cast<std::size_t>(step.action)]);
    }

    void finish_counters() {
        auto& c = record_.counters;
        for (const auto& b : buffers_) {
            c.arrived_packets += b.counters().arrived_packets;
            c.served_packets += b.counters().served_packets;
            c.arrived_bits += b.counters().arrived_bits;
            c.served_bits += b.counters().served_bits;
            c.queued_packets += static_cast<std::int64_t>(b.size());
            c.queued_bits += b.buffer_bits();
        }
    }

    void trace_grants(std::int64_t t) {
        auto& out = *opts_.grant_trace;
        for (std::size_t i = 0; i < grants_.size(); ++i) {
            const auto& g = grants_[i];
            out << t << ',' << slice_key(grant_slices_[i]) << ',' << g.user << ',' << g.oru << ',' << g.rbs << ','
                << g.mod_order << ',' << g.bits << '\n';
        }
    }

    void trace_channel(std::int64_t t) {
        auto& out = *opts_.channel_trace;
        const int rbs = cfg_.grid.total_rbs();
        for (int k = 0; k < channel_.users(); ++k) {
            for (int m = 0; m < channel_.orus(); ++m) {
                double interference = 0.0;
                for (int rb = 0; rb < rbs; ++rb) interference += channel_.interference(k, m, rb, usage_);
                interference /= rbs;
                const double signal = channel_.rb_power_w(m) * channel_.gain(k, m);
                const double sinr = sinr_from(signal, interference, channel_.noise_w());
                out << t << ',' << k << ',' << m << ',' << 10.0 * std::log10(channel_.gain(k, m)) << ','
                    << 10.0 * std::log10(sinr) << '\n';
            }
        }
    }

    ScenarioConfig cfg_;
    RunOptions opts_;
    std::uint64_t seed_;
    std::int64_t tti_ns_;
    std::int64_t total_ttis_;
    Rng mobility_rng_;
    Rng fading_rng_;
    MobilityState mobility_;
    ChannelState channel_;
    TrafficGenerator traffic_;
    std::vector<UserBuffer> buffers_;
    SliceAllocation allocation_;
    std::vector<std::vector<int>> inter_actions_;

    PerSlice<std::optional<IntraActionGrid>> grids_;
    PerSlice<std::unique_ptr<IntraStateBuilder>> builders_;
    PerSlice<std::vector<int>> slice_users_;
    PerSlice<std::unique_ptr<WindowAgent>> intra_;
    PerSlice<double> tau_{};
    std::unique_ptr<WindowAgent> inter_;

    KpiWindow intra_window_;
    KpiWindow inter_window_;
    RbUsage prev_usage_;
    RbUsage usage_;
    std::vector<Grant> grants_;
    std::vector<SliceId> grant_slices_;
    RunRecord record_;
};

}  // namespace

RunRecord run(const ScenarioConfig& cfg, const RunOptions& opts) {
    Simulator sim(cfg, opts);
    return sim.run();
}

RunRecord pretrain(const ScenarioConfig& cfg, double seconds, const std::filesystem::path& dir,
                   std::optional<std::uint64_t> seed) {
    if (seconds < 0.0) throw std::invalid_argument("pretraining horizon must be >= 0");
    RunOptions opts;
    opts.mode = RunMode::Proposed;
    opts.seed = seed;
    opts.save_agents = dir;
    if (seconds == 0.0) {
        // No TTIs run; the agents are built for a nominal one-period horizon and saved untouched.
        ScenarioConfig shell = cfg;
        shell.duration_s = shell.cadence.inter_period_ttis * shell.grid.tti_s;
        opts.save_agents.reset();
        Simulator sim(shell, opts);
        sim.save_agents(dir);
        RunRecord empty;
        empty.seed = seed.value_or(cfg.seed);
        return empty;
    }
    ScenarioConfig horizon = cfg;
    horizon.duration_s = seconds;
    return run(horizon, opts);
}

RunSummary summarize(const RunRecord& record) {
    RunSummary out;
    out.mode = record.mode;
    out.seed = record.seed;
    PerSlice<int> windows{};
    PerSlice<int> delay_windows{};
    PerSlice<bool> have_min{};
    for (const auto& row : record.windows) {
        const std::size_t i = index_of(row.slice);
        auto& s = out.slices[i];
        s.umax_norm += row.kpi.umax_norm;
        s.umax_raw += row.kpi.umax;
        s.r_avg += row.kpi.r_avg;
        s.r_raw_bps += row.kpi.r_raw_bps;
        s.p_bar += row.kpi.p_bar;
        ++windows[i];
        if (row.kpi.has_delay) {
            s.d_avg += row.kpi.d_avg;
            s.d_raw_s += row.kpi.d_raw_s;
            ++delay_windows[i];
            if (!have_min[i] || row.kpi.d_avg < s.d_avg_min) s.d_avg_min = row.kpi.d_avg;
            have_min[i] = true;
        }
    }
    for (std::size_t i = 0; i < kNumSlices; ++i) {
        auto& s = out.slices[i];
        if (windows[i] > 0) {
            s.umax_norm /= windows[i];
            s.umax_raw /= windows[i];
            s.r_avg /= windows[i];
            s.r_raw_bps /= windows[i];
            s.p_bar /= windows[i];
        }
        if (delay_windows[i] > 0) {
            s.d_avg /= delay_windows[i];
            s.d_raw_s /= delay_windows[i];
        }
        out.umax_norm_total += s.umax_norm;
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double relative_delta(double value, double reference) {
    if (reference == 0.0) return value - reference;
    return (value - reference) / std::abs(reference);
}

Comparison aggregate(std::span<const RunSummary> runs, std::span<const RunMode> modes) {
    if (modes.empty()) throw std::invalid_argument("comparison needs at least one mode");
    Comparison cmp;
    cmp.reference = modes.front();
    cmp.modes.assign(modes.begin(), modes.end());
    cmp.runs.assign(runs.begin(), runs.end());

    auto collect = [&](RunMode mode, auto field) {
        std::vector<double> v;
        for (const auto& r : runs) {
            if (r.mode == mode) v.push_back(field(r));
        }
        return v;
    };

    std::vector<PerSlice<SliceSummary>> medians;
    for (RunMode mode : modes) {
        PerSlice<SliceSummary> m{};
        for (std::size_t i = 0; i < kNumSlices; ++i) {
            auto& s = m[i];
            s.umax_norm = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].umax_norm; }));
            s.umax_raw = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].umax_raw; }));
            s.r_avg = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].r_avg; }));
            s.r_raw_bps = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].r_raw_bps; }));
            s.d_avg = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].d_avg; }));
            s.d_raw_s = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].d_raw_s; }));
            s.p_bar = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].p_bar; }));
            s.d_avg_min = median(collect(mode, [i](const RunSummary& r) { return r.slices[i].d_avg_min; }));
        }
        medians.push_back(m);
        cmp.umax_norm_total_median.push_back(median(collect(mode, [](const RunSummary& r) { return r.umax_norm_total; })));
    }

    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        for (SliceId s : kAllSlices) {
            const std::size_t i = index_of(s);
            const auto& v = medians[mi][i];
            const auto& ref = medians[0][i];
            cmp.rows.push_back({modes[mi], s, v, relative_delta(v.umax_norm, ref.umax_norm),
                                relative_delta(v.r_avg, ref.r_avg), relative_delta(v.d_avg, ref.d_avg),
                                v.p_bar - ref.p_bar});
        }
    }
    return cmp;
}

Comparison compare(const ScenarioConfig& cfg, std::span<const RunMode> modes, std::span<const std::uint64_t> seeds,
                   const std::function<void(const RunRecord&)>& on_run) {
    if (seeds.empty()) throw std::invalid_argument("comparison needs at least one seed");
    std::vector<RunSummary> summaries;
    for (RunMode mode : modes) {
        for (std::uint64_t seed : seeds) {
            RunOptions opts;
            opts.mode = mode;
            opts.seed = seed;
            const RunRecord rec = run(cfg, opts);
            summaries.push_back(summarize(rec));
            if (on_run) on_run(rec);
        }
    }
    return aggregate(summaries, modes);
}

}  // namespace ranslice
