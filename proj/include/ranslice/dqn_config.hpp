#pragma once

#include <vector>

namespace ranslice {

// Hyperparameters of one value-based learner.
struct DqnConfig {
    std::vector<int> hidden_layers;
    double learning_rate = 1e-3;
    double discount = 0.9;
    int batch_size = 32;
    int target_sync_period = 100;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    // Fraction of the run's scheduled invocations over which epsilon decays linearly.
    double epsilon_decay_fraction = 0.6;
    int replay_capacity = 10000;
    // 0 disables momentum (plain SGD).
    double momentum = 0.0;
};

}  // namespace ranslice
