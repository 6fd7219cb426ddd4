#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fvim/adversary.hpp"
#include "fvim/env.hpp"
#include "fvim/errors.hpp"
#include "fvim/ppo.hpp"

namespace fvim {

// Expert demonstrations. StateAction trajectories keep the action taken at
// each state; StateTransition datasets drop actions and pair consecutive
// states, which is all the observation-only setting is allowed to see.
struct DemoTrajectory {
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> actions;  // empty in StateTransition mode
};

struct DemoDataset {
    std::string env_id;
    PairMode mode = PairMode::StateAction;
    std::vector<DemoTrajectory> trajectories;
    std::uint64_t source_seed = 0;

    std::size_t pair_count() const;
};

DemoDataset generate_demos(const GaussianPolicy& expert, const EnvSpec& spec,
                           int n_trajectories, std::uint64_t seed);

// T states -> T-1 consecutive pairs; actions discarded.
DemoDataset strip_actions(const DemoDataset& demos);

// k whole trajectories, uniform without replacement.
DemoDataset subsample(const DemoDataset& demos, int k, std::uint64_t seed);

// All pairs of a dataset, flattened for the discriminator.
PairBatch demo_pair_batch(const DemoDataset& demos);

struct TrainerConfig {
    DivergenceKind kind = DivergenceKind::GAN;
    LossVariant variant = LossVariant::Reparameterized;
    RegConfig reg{0.0, std::nullopt, PenaltyMode::Params};
    PPOConfig ppo;
    int n_iterations = 50;
    std::size_t steps_per_iteration = 4000;
    int disc_epochs = 5;
    double disc_lr = 1e-3;
    int disc_minibatch = 256;
    std::vector<int> policy_hidden = {64, 64};
    std::vector<int> disc_hidden = {64, 64};
    int eval_episodes = 10;
    std::uint64_t seed = 0;
};

// One curve row per completed iteration; mirrors the CSV log schema.
struct IterationRow {
    int iteration = 0;
    std::uint64_t env_steps = 0;
    double mean_true_return = 0.0;
    double std_true_return = 0.0;
    double disc_objective = 0.0;
    double penalty = 0.0;
    double mean_adv_reward = 0.0;
    double grad_norm_raw = 0.0;
    double grad_norm_applied = 0.0;
    std::string stability_event;
};

struct TrainResult {
    GaussianPolicy policy;
    std::vector<IterationRow> curve;
    std::vector<StabilityEvent> events;
};

// Adversarial imitation over state-action pairs (standard setting).
TrainResult train_fvim(const EnvSpec& spec, const DemoDataset& demos, const TrainerConfig& config);

// Adversarial imitation from observation over state-transition pairs; the
// policy update only ever reads actions from its own rollouts.
TrainResult train_fvimo(const EnvSpec& spec, const DemoDataset& demos,
                        const TrainerConfig& config);

struct SweepRow {
    int demo_count = 0;
    double final_mean_return = 0.0;
    double final_std_return = 0.0;
    bool failed = false;
    std::string note;
};

// Train once per demo count on a count-specific derived seed and record the
// final evaluation; per-cell failures are recorded, not fatal.
std::vector<SweepRow> demo_sweep(const EnvSpec& spec, const DemoDataset& demos,
                                 const TrainerConfig& config, const std::vector<int>& counts);

}  // namespace fvim
