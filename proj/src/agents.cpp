#include "ranslice/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranslice {

IntraActionGrid::IntraActionGrid(const ThresholdGrid& grid) {
    if (grid.steps < 2 || !(grid.tau_min_s < grid.tau_max_s)) throw std::invalid_argument("degenerate threshold grid");
    const double step = (grid.tau_max_s - grid.tau_min_s) / (grid.steps - 1);
    for (int i = 0; i < grid.steps; ++i) values_.push_back(grid.tau_min_s + step * i);
    values_.back() = grid.tau_max_s;
}

double IntraActionGrid::threshold_of(int index) const {
    if (index < 0 || index >= size()) {
        throw std::out_of_range("threshold index " + std::to_string(index) + " outside a grid of " +
                                std::to_string(size()));
    }
    return values_[static_cast<std::size_t>(index)];
}

namespace {

void compositions(int remaining, int parts_left, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
    if (parts_left == 1) {
        prefix.push_back(remaining);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int first = 0; first <= remaining; ++first) {
        prefix.push_back(first);
        compositions(remaining - first, parts_left - 1, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<std::vector<int>> enumerate_rbg_actions(int total, int parts) {
    if (total < 0 || parts < 1) throw std::invalid_argument("compositions need total >= 0 and parts >= 1");
    std::vector<std::vector<int>> out;
    std::vector<int> prefix;
    compositions(total, parts, prefix, out);
    return out;
}

double normalized_gain_feature(double gain_linear, double log10_lo, double log10_hi) {
    if (!(gain_linear > 0.0)) return 0.0;
    const double v = (std::log10(gain_linear) - log10_lo) / (log10_hi - log10_lo);
    return std::clamp(v, 0.0, 1.0);
}

IntraStateBuilder::IntraStateBuilder(const ScenarioConfig& cfg, SliceId slice)
    : users_(cfg.users_of(slice)),
      orus_(static_cast<int>(cfg.orus.size())),
      lo_(cfg.channel.state_gain_log10_lo),
      hi_(cfg.channel.state_gain_log10_hi),
      running_max_bits_(users_.size(), 1.0) {}

std::vector<double> IntraStateBuilder::build(const ChannelState& channel, std::span<const UserBuffer> buffers) {
    std::vector<double> state;
    state.reserve(static_cast<std::size_t>(dimension()));
    for (int m = 0; m < orus_; ++m) {
        for (int k : users_) state.push_back(normalized_gain_feature(channel.gain(k, m), lo_, hi_));
    }
    for (std::size_t i = 0; i < users_.size(); ++i) {
        const auto bits = static_cast<double>(buffers[static_cast<std::size_t>(users_[i])].buffer_bits());
        running_max_bits_[i] = std::max(running_max_bits_[i], bits);
        state.push_back(bits / running_max_bits_[i]);
    }
    return state;
}

WindowSignals signals_of(const SliceKpi& kpi) { return {kpi.umax_norm, kpi.r_avg, kpi.epsilon_norm}; }

double intra_reward(const RewardWeights& w, const WindowSignals& sig, bool literal_sign) {
    const double u_term = literal_sign ? w.alpha * sig.umax_norm : -w.alpha * sig.umax_norm;
    return u_term + w.beta * sig.r_avg - w.gamma * sig.epsilon_norm;
}

double tddqn_reward(const RewardWeights& w, const WindowSignals& sig) {
    return (w.beta + w.alpha) * sig.r_avg - w.gamma * sig.epsilon_norm;
}

std::vector<double> build_inter_state(const PerSlice<SliceKpi>& kpis) {
    std::vector<double> state;
    state.reserve(4 * kNumSlices);
    for (SliceId s : kAllSlices) {
        const auto& k = kpis[index_of(s)];
        state.insert(state.end(), {k.r_avg, k.umax_norm, k.delta, k.epsilon_norm});
    }
    return state;
}

double inter_reward(const PerSlice<SliceKpi>& kpis) {
    double r = 0.0;
    for (const auto& k : kpis) r += k.r_avg - k.d_avg;
    return r;
}

SliceAllocation apply_reconfiguration(std::span<const int> composition) {
    if (composition.size() != kNumSlices) throw std::invalid_argument("composition must cover every slice");
    SliceAllocation a;
    for (std::size_t i = 0; i < kNumSlices; ++i) {
        if (composition[i] < 0) throw std::invalid_argument("negative RBG count");
        a.rbgs[i] = composition[i];
    }
    return a;
}

WindowAgent::WindowAgent(std::string name, DqnLearner learner) : name_(std::move(name)), learner_(std::move(learner)) {}

WindowAgent::Step WindowAgent::step(std::vector<double> state, std::optional<double> reward_for_previous) {
    Step out;
    if (previous_state_ && reward_for_previous) {
        out.reward = reward_for_previous;
        out.loss = learner_.observe({*previous_state_, previous_action_, *reward_for_previous, state, false});
    }
    out.epsilon = learner_.epsilon();
    out.action = learner_.act(state);
    previous_action_ = out.action;
    previous_state_ = std::move(state);
    return out;
}

}  // namespace ranslice
