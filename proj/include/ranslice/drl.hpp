#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/dqn_config.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonFiniteParameters : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fully connected network: rectifier on hidden layers, identity output.
class Mlp {
public:
    // widths = {input, hidden..., output}; parameters start at zero.
    explicit Mlp(std::vector<int> widths);
    // Glorot-uniform weights, zero biases.
    Mlp(std::vector<int> widths, Rng& init_rng);

    const std::vector<int>& widths() const { return widths_; }
    int input_size() const { return widths_.front(); }
    int output_size() const { return widths_.back(); }
    std::size_t layers() const { return weights_.size(); }

    Eigen::VectorXd forward(std::span<const double> state) const;
    // One sample per column.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

    Eigen::MatrixXd& weight(std::size_t layer) { return weights_[layer]; }
    const Eigen::MatrixXd& weight(std::size_t layer) const { return weights_[layer]; }
    Eigen::VectorXd& bias(std::size_t layer) { return biases_[layer]; }
    const Eigen::VectorXd& bias(std::size_t layer) const { return biases_[layer]; }

    std::size_t parameter_count() const;
    // Layer by layer: weights row-major, then bias.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    bool all_finite() const;

    friend bool operator==(const Mlp& a, const Mlp& b);

private:
    std::vector<int> widths_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Mean over the batch of (target_b - Q(state_b, action_b))^2. Fills `grads`
// with the gradient of that loss when non-null.
double squared_td_loss(const Mlp& net, const Eigen::MatrixXd& states, std::span<const int> actions,
                       std::span<const double> targets, MlpGradients* grads = nullptr);

// Gradient descent step, optionally with heavy-ball momentum.
class SgdOptimizer {
public:
    SgdOptimizer(double learning_rate, double momentum = 0.0) : lr_(learning_rate), momentum_(momentum) {}
    void apply(Mlp& net, const MlpGradients& grads);

private:
    double lr_;
    double momentum_;
    MlpGradients velocity_;
};

// r + discount * max_a Q_target(next, a), or r alone for terminal transitions.
double td_target(double reward, std::span<const double> next_q, double discount, bool terminal);
double td_target(double reward, std::span<const double> next_state, const Mlp& target_net, double discount,
                 bool terminal);

// Index of the largest value; ties go to the lowest index.
int greedy_action(std::span<const double> q);

// Uniform random action with probability epsilon, greedy otherwise.
int act(const Mlp& net, std::span<const double> state, double epsilon, Rng& rng);

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    // Uniform sample without replacement; batch must not exceed size().
    std::vector<std::size_t> sample(std::size_t batch, Rng& rng);

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
    std::vector<std::size_t> scratch_;
};

// Linear decay from start to end over `decay_steps` invocations, then flat.
class EpsilonSchedule {
public:
    EpsilonSchedule(double start, double end, std::int64_t decay_steps)
        : start_(start), end_(end), decay_steps_(decay_steps) {}

    double value(std::int64_t step) const;
    std::int64_t decay_steps() const { return decay_steps_; }

private:
    double start_;
    double end_;
    std::int64_t decay_steps_;
};

// One independent learner: online and target networks, replay, exploration.
class DqnLearner {
public:
    struct Streams {
        Rng init;
        Rng explore;
        Rng replay;
    };

    DqnLearner(int state_dim, int actions, const DqnConfig& cfg, std::int64_t scheduled_invocations, Streams streams);

    // Epsilon-greedy action for the current invocation; advances the invocation counter.
    int act(std::span<const double> state);
    double epsilon() const { return schedule_.value(invocations_); }

    // Stores the transition and runs one training step once the replay holds a batch.
    std::optional<double> observe(Transition t);
    std::optional<double> train_step();
    void sync_target() { target_ = online_; }

    const Mlp& online() const { return online_; }
    const Mlp& target() const { return target_; }
    Mlp& online() { return online_; }
    std::int64_t invocations() const { return invocations_; }
    std::int64_t train_steps() const { return train_steps_; }
    const ReplayBuffer& replay() const { return replay_; }
    const DqnConfig& config() const { return cfg_; }

    void save(std::ostream& out) const;
    // Replaces networks and counters; the replay buffer is left untouched.
    void load(std::istream& in);

private:
    DqnConfig cfg_;
    Streams streams_;
    Mlp online_;
    Mlp target_;
    SgdOptimizer optimizer_;
    ReplayBuffer replay_;
    EpsilonSchedule schedule_;
    std::int64_t invocations_ = 0;
    std::int64_t train_steps_ = 0;
};

}  // namespace ranslice
