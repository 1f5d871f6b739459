#pragma once

#include <random>
#include <vector>

#include "mpo/mdp.hpp"
#include "mpo/partition.hpp"

namespace mpo {

struct TrainConfig {
    long steps = 1000;           // episodes
    int horizon = 100;           // steps per episode
    double learning_rate = 0.1;
    double entropy_bonus = 0.0;
    std::vector<double> start;   // start distribution; empty = uniform
    long eval_interval = 1;      // exact golden return / KL every N episodes

    void validate(int num_states) const;
};

struct TraceRow {
    long step = 0;
    int phase = 0;
    double obs_reward = 0.0;     // discounted episode return of observation rewards
    double golden_return = 0.0;  // exact, against the golden reward
    double kl = 0.0;             // drift from the initial (uniform) policy
};

struct TrainResult {
    TabularPolicy policy;
    Partition final_partition;
    std::vector<TraceRow> trace;
    // Best greedy (argmax) policy seen at any evaluation point, with the
    // partition it was measured under and its exact golden return.
    TabularPolicy best_greedy_policy;
    Partition best_greedy_partition = Partition::single_cell(1);
    double best_greedy_return = 0.0;
};

/// REINFORCE with a running-mean baseline on a softmax observation policy.
/// The learner only ever sees cell-averaged observation rewards; schedule
/// splits fire before the episode whose index equals their trigger step,
/// with children inheriting the parent cell's action distribution.
TrainResult policy_train(const GoldenMdp& mdp, const RefinementSchedule& schedule,
                         const Partition& initial, const TrainConfig& config,
                         std::mt19937_64& rng);

/// Deterministic policy putting all mass on each label's argmax action
/// (lowest index wins ties).
TabularPolicy argmax_policy(const TabularPolicy& policy);

TabularPolicy uniform_policy(const Partition& partition, int num_actions);

std::vector<double> uniform_start(int num_states);

}  // namespace mpo
