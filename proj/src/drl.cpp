#include "ranslice/drl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace ranslice {

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw DimensionMismatch("network needs at least an input and an output layer");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        weights_.push_back(Eigen::MatrixXd::Zero(widths_[l + 1], widths_[l]));
        biases_.push_back(Eigen::VectorXd::Zero(widths_[l + 1]));
    }
}

Mlp::Mlp(std::vector<int> widths, Rng& init_rng) : Mlp(std::move(widths)) {
    for (auto& w : weights_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = init_rng.uniform(-limit, limit);
        }
    }
}

Eigen::VectorXd Mlp::forward(std::span<const double> state) const {
    if (static_cast<int>(state.size()) != input_size()) {
        throw DimensionMismatch("state has " + std::to_string(state.size()) + " entries, network expects " +
                                std::to_string(input_size()));
    }
    Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    return forward_batch(x).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
    if (inputs.rows() != input_size()) throw DimensionMismatch("batch row count does not match the input width");
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = weights_[l] * a;
        z.colwise() += biases_[l];
        if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

std::vector<double> Mlp::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const auto& w = weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        }
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) flat.push_back(biases_[l](i));
    }
    return flat;
}

void Mlp::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw DimensionMismatch("parameter vector has the wrong length");
    std::size_t i = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        auto& w = weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[i++];
        }
        for (Eigen::Index b = 0; b < biases_[l].size(); ++b) biases_[l](b) = flat[i++];
    }
}

bool Mlp::all_finite() const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
    }
    return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
    if (a.widths_ != b.widths_) return false;
    for (std::size_t l = 0; l < a.weights_.size(); ++l) {
        if (a.weights_[l] != b.weights_[l] || a.biases_[l] != b.biases_[l]) return false;
    }
    return true;
}

double squared_td_loss(const Mlp& net, const Eigen::MatrixXd& states, std::span<const int> actions,
                       std::span<const double> targets, MlpGradients* grads) {
    const Eigen::Index batch = states.cols();
    if (batch == 0 || static_cast<Eigen::Index>(actions.size()) != batch ||
        static_cast<Eigen::Index>(targets.size()) != batch) {
        throw DimensionMismatch("batch, action and target sizes must agree and be non-zero");
    }
    if (states.rows() != net.input_size()) throw DimensionMismatch("batch row count does not match the input width");

    const std::size_t layers = net.layers();
    std::vector<Eigen::MatrixXd> pre(layers);
    std::vector<Eigen::MatrixXd> act(layers + 1);
    act[0] = states;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = net.weight(l) * act[l];
        pre[l].colwise() += net.bias(l);
        act[l + 1] = (l + 1 < layers) ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
    }

    const Eigen::MatrixXd& q = act[layers];
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const int a = actions[b];
        if (a < 0 || a >= q.rows()) throw DimensionMismatch("action index outside the action set");
        const double err = q(a, b) - targets[b];
        loss += err * err;
        delta(a, b) = 2.0 * err * inv_b;
    }
    loss *= inv_b;
    if (!grads) return loss;

    grads->weights.resize(layers);
    grads->biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        grads->weights[l] = delta * act[l].transpose();
        grads->biases[l] = delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = net.weight(l).transpose() * delta;
        delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return loss;
}

void SgdOptimizer::apply(Mlp& net, const MlpGradients& grads) {
    const std::size_t layers = net.layers();
    if (momentum_ > 0.0) {
        if (velocity_.weights.size() != layers) {
            velocity_.weights.clear();
            velocity_.biases.clear();
            for (std::size_t l = 0; l < layers; ++l) {
                velocity_.weights.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
                velocity_.biases.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
            }
        }
        for (std::size_t l = 0; l < layers; ++l) {
            velocity_.weights[l] = momentum_ * velocity_.weights[l] - lr_ * grads.weights[l];
            velocity_.biases[l] = momentum_ * velocity_.biases[l] - lr_ * grads.biases[l];
            net.weight(l) += velocity_.weights[l];
            net.bias(l) += velocity_.biases[l];
        }
        return;
    }
    for (std::size_t l = 0; l < layers; ++l) {
        net.weight(l) -= lr_ * grads.weights[l];
        net.bias(l) -= lr_ * grads.biases[l];
    }
}

double td_target(double reward, std::span<const double> next_q, double discount, bool terminal) {
    if (terminal || next_q.empty()) return reward;
    return reward + discount * *std::max_element(next_q.begin(), next_q.end());
}

double td_target(double reward, std::span<const double> next_state, const Mlp& target_net, double discount,
                 bool terminal) {
    if (terminal) return reward;
    const Eigen::VectorXd q = target_net.forward(next_state);
    return td_target(reward, std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), discount, false);
}

int greedy_action(std::span<const double> q) {
    int best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = static_cast<int>(i);
    }
    return best;
}

int act(const Mlp& net, std::span<const double> state, double epsilon, Rng& rng) {
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(net.output_size())));
    }
    const Eigen::VectorXd q = net.forward(state);
    return greedy_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) { items_.reserve(capacity); }

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        scratch_.push_back(scratch_.size());
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) {
    if (batch > items_.size()) throw std::invalid_argument("replay sample larger than the buffer");
    // Partial Fisher-Yates over a persistent permutation of indices.
    const std::size_t n = scratch_.size();
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(scratch_[i], scratch_[j]);
    }
    return {scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(batch)};
}

double EpsilonSchedule::value(std::int64_t step) const {
    if (decay_steps_ <= 0 || step >= decay_steps_) return end_;
    const double frac = static_cast<double>(step) / static_cast<double>(decay_steps_);
    return start_ + (end_ - start_) * frac;
}

namespace {

std::vector<int> layer_widths(int state_dim, const std::vector<int>& hidden, int actions) {
    std::vector<int> w{state_dim};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(actions);
    return w;
}

void write_double(std::ostream& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

double read_double(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw CheckpointError("truncated checkpoint");
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw CheckpointError("bad number '" + tok + "'");
    return v;
}

void expect_word(std::istream& in, const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw CheckpointError("expected '" + word + "' in checkpoint, got '" + tok + "'");
}

void write_net(std::ostream& out, const Mlp& net) {
    for (std::size_t l = 0; l < net.layers(); ++l) {
        const auto& w = net.weight(l);
        out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                if (c) out << ' ';
                write_double(out, w(r, c));
            }
            out << '\n';
        }
        const auto& b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            if (i) out << ' ';
            write_double(out, b(i));
        }
        out << '\n';
    }
}

void read_net(std::istream& in, Mlp& net) {
    for (std::size_t l = 0; l < net.layers(); ++l) {
        expect_word(in, "layer");
        std::size_t idx = 0;
        Eigen::Index rows = 0, cols = 0;
        in >> idx >> rows >> cols;
        auto& w = net.weight(l);
        if (!in || idx != l || rows != w.rows() || cols != w.cols()) throw CheckpointError("layer shape mismatch");
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = read_double(in);
        }
        auto& b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = read_double(in);
    }
}

}  // namespace

DqnLearner::DqnLearner(int state_dim, int actions, const DqnConfig& cfg, std::int64_t scheduled_invocations,
                       Streams streams)
    : cfg_(cfg),
      streams_(std::move(streams)),
      online_(layer_widths(state_dim, cfg.hidden_layers, actions), streams_.init),
      target_(online_),
      optimizer_(cfg.learning_rate, cfg.momentum),
      replay_(static_cast<std::size_t>(cfg.replay_capacity)),
      schedule_(cfg.epsilon_start, cfg.epsilon_end,
                std::llround(cfg.epsilon_decay_fraction * static_cast<double>(scheduled_invocations))) {}

int DqnLearner::act(std::span<const double> state) {
    const double eps = epsilon();
    ++invocations_;
    return ranslice::act(online_, state, eps, streams_.explore);
}

std::optional<double> DqnLearner::observe(Transition t) {
    replay_.push(std::move(t));
    return train_step();
}

std::optional<double> DqnLearner::train_step() {
    const auto batch = static_cast<std::size_t>(cfg_.batch_size);
    if (replay_.size() < batch) return std::nullopt;

    const auto picks = replay_.sample(batch, streams_.replay);
    const int dim = online_.input_size();
    Eigen::MatrixXd states(dim, static_cast<Eigen::Index>(batch));
    Eigen::MatrixXd next(dim, static_cast<Eigen::Index>(batch));
    std::vector<int> actions(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const Transition& t = replay_[picks[b]];
        if (static_cast<int>(t.state.size()) != dim || static_cast<int>(t.next_state.size()) != dim) {
            throw DimensionMismatch("stored transition does not match the network input");
        }
        states.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), dim);
        next.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), dim);
        actions[b] = t.action;
    }
    const Eigen::MatrixXd next_q = target_.forward_batch(next);
    std::vector<double> targets(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const Transition& t = replay_[picks[b]];
        const auto col = static_cast<Eigen::Index>(b);
        targets[b] = t.terminal ? t.reward : t.reward + cfg_.discount * next_q.col(col).maxCoeff();
    }

    MlpGradients grads;
    const double loss = squared_td_loss(online_, states, actions, targets, &grads);
    optimizer_.apply(online_, grads);
    ++train_steps_;
    if (train_steps_ % cfg_.target_sync_period == 0) sync_target();
    if (!online_.all_finite()) throw NonFiniteParameters("network parameters became non-finite");
    return loss;
}

void DqnLearner::save(std::ostream& out) const {
    out << "ranslice-dqn 1\nwidths";
    for (int w : online_.widths()) out << ' ' << w;
    out << "\ninvocations " << invocations_ << "\ntrain_steps " << train_steps_ << "\nepsilon_decay_steps "
        << schedule_.decay_steps() << "\nonline\n";
    write_net(out, online_);
    out << "target\n";
    write_net(out, target_);
}

void DqnLearner::load(std::istream& in) {
    expect_word(in, "ranslice-dqn");
    int version = 0;
    in >> version;
    if (version != 1) throw CheckpointError("unsupported checkpoint version");
    expect_word(in, "widths");
    std::vector<int> widths;
    for (std::size_t i = 0; i < online_.widths().size(); ++i) {
        int w = 0;
        in >> w;
        widths.push_back(w);
    }
    if (!in || widths != online_.widths()) throw CheckpointError("checkpoint network shape does not match the agent");
    std::int64_t invocations = 0, steps = 0, decay = 0;
    expect_word(in, "invocations");
    in >> invocations;
    expect_word(in, "train_steps");
    in >> steps;
    expect_word(in, "epsilon_decay_steps");
    in >> decay;
    if (!in) throw CheckpointError("bad checkpoint header");
    Mlp online(online_.widths());
    Mlp target(online_.widths());
    expect_word(in, "online");
    read_net(in, online);
    expect_word(in, "target");
    read_net(in, target);

    online_ = std::move(online);
    target_ = std::move(target);
    invocations_ = invocations;
    train_steps_ = steps;
    schedule_ = EpsilonSchedule(cfg_.epsilon_start, cfg_.epsilon_end, decay);
}

}  // namespace ranslice
