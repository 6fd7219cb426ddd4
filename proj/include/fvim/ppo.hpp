#pragma once

#include <vector>

#include "fvim/rollout.hpp"

namespace fvim {

enum class PolicyUpdateRule {
    PPO,        // clipped surrogate, several epochs
    Reinforce,  // single-pass likelihood-ratio update with baseline
};

struct PPOConfig {
    double clip_ratio = 0.2;
    double gamma = 0.995;
    double gae_lambda = 0.97;
    double entropy_coef = 0.001;
    int ppo_epochs = 10;
    int minibatch_size = 256;
    double policy_lr = 3e-4;
    double value_lr = 3e-4;
    bool advantage_normalization = true;
    PolicyUpdateRule update_rule = PolicyUpdateRule::PPO;
};

struct PPOStats {
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
    double entropy = 0.0;
    double policy_loss = 0.0;  // negated surrogate, averaged over minibatches
    double value_loss = 0.0;
};

// Optimizer state for one policy/value pair; step in lockstep.
struct PolicyOptimizer {
    AdamState mean;
    AdamState log_std;
    AdamState value;
};

PolicyOptimizer make_policy_optimizer(const GaussianPolicy& policy, const ValueFunction& vf,
                                      const PPOConfig& config);

// One full update from a buffer that already holds advantages and returns.
// Throws NonFiniteError when a loss stops being finite.
PPOStats ppo_update(GaussianPolicy& policy, ValueFunction& vf, PolicyOptimizer& opt,
                    RolloutBuffer& buffer, const PPOConfig& config, Rng& rng);

struct ExpertResult {
    GaussianPolicy policy;
    ValueFunction value;
    std::vector<double> return_curve;  // per-iteration mean true return
};

ExpertResult train_expert(const EnvSpec& spec, const PPOConfig& config, int n_iterations,
                          std::size_t steps_per_iteration, std::uint64_t seed,
                          const std::vector<int>& hidden = {64, 64});

struct EvalResult {
    double mean_return = 0.0;
    double std_return = 0.0;
};

EvalResult evaluate_policy(const GaussianPolicy& policy, const EnvSpec& spec, int n_episodes,
                           std::uint64_t seed);

}  // namespace fvim
