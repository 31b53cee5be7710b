#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranslice/channel.hpp"
#include "ranslice/domain.hpp"
#include "ranslice/drl.hpp"
#include "ranslice/metrics.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

// D equally spaced timeout thresholds from tau_min to tau_max inclusive.
class IntraActionGrid {
public:
    explicit IntraActionGrid(const ThresholdGrid& grid);

    int size() const { return static_cast<int>(values_.size()); }
    // Throws std::out_of_range for an index outside the grid.
    double threshold_of(int index) const;
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

// Nonnegative integer compositions of `total` into `parts`, lexicographic.
std::vector<std::vector<int>> enumerate_rbg_actions(int total, int parts);

// clamp((log10 g - lo) / (hi - lo), 0, 1)
double normalized_gain_feature(double gain_linear, double log10_lo, double log10_hi);

// Channel rows (ORU-major) for the slice's users followed by their buffer
// occupancy relative to each user's largest buffer seen so far.
class IntraStateBuilder {
public:
    IntraStateBuilder(const ScenarioConfig& cfg, SliceId slice);

    int dimension() const { return static_cast<int>(orus_ * users_.size() + users_.size()); }
    const std::vector<int>& users() const { return users_; }

    std::vector<double> build(const ChannelState& channel, std::span<const UserBuffer> buffers);

private:
    std::vector<int> users_;
    int orus_;
    double lo_;
    double hi_;
    std::vector<double> running_max_bits_;
};

struct WindowSignals {
    double umax_norm = 0.0;
    double r_avg = 0.0;
    double epsilon_norm = 0.0;
};

WindowSignals signals_of(const SliceKpi& kpi);

// -alpha * U + beta * R - gamma * eps; `literal_sign` uses +alpha * U.
double intra_reward(const RewardWeights& w, const WindowSignals& sig, bool literal_sign = false);

// Throughput/penalty-only baseline: (alpha + beta) * R - gamma * eps.
double tddqn_reward(const RewardWeights& w, const WindowSignals& sig);

// (R_avg, U_norm, delta, eps_norm) per slice in E, U, M order.
std::vector<double> build_inter_state(const PerSlice<SliceKpi>& kpis);

// sum over slices of (R_avg - d_avg)
double inter_reward(const PerSlice<SliceKpi>& kpis);

SliceAllocation apply_reconfiguration(std::span<const int> composition);

// Binds a learner to a windowed decision process: at every window boundary
// the previous (state, action) pair is completed with the closed window's
// reward and the new state, stored, and trained on; then a new action is drawn.
class WindowAgent {
public:
    struct Step {
        int action = 0;
        double epsilon = 0.0;
        std::optional<double> reward;
        std::optional<double> loss;
    };

    WindowAgent(std::string name, DqnLearner learner);

    Step step(std::vector<double> state, std::optional<double> reward_for_previous);

    const std::string& name() const { return name_; }
    DqnLearner& learner() { return learner_; }
    const DqnLearner& learner() const { return learner_; }

private:
    std::string name_;
    DqnLearner learner_;
    std::optional<std::vector<double>> previous_state_;
    int previous_action_ = 0;
};

}  // namespace ranslice
