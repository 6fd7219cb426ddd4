#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fvim/env.hpp"
#include "fvim/policy.hpp"

namespace fvim {

// On-policy samples for one update, flattened per-timestep arrays plus
// episode bookkeeping. Episodes here end by time limit, so each carries a
// bootstrap value for the state after its final step; `terminals` marks true
// terminations and stays zero for these environments.
struct RolloutBuffer {
    int obs_dim = 0;
    int act_dim = 0;
    std::vector<double> states;
    std::vector<double> actions;
    std::vector<double> next_states;
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<double> advantages;
    std::vector<double> returns_to_go;
    std::vector<std::uint8_t> terminals;

    struct Episode {
        std::size_t begin = 0;
        std::size_t end = 0;  // one past last index
        double bootstrap_value = 0.0;
    };
    std::vector<Episode> episodes;

    std::size_t size() const { return log_probs.size(); }
    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * obs_dim, static_cast<std::size_t>(obs_dim)};
    }
    std::span<const double> action(std::size_t i) const {
        return {actions.data() + i * act_dim, static_cast<std::size_t>(act_dim)};
    }
    std::span<const double> next_state(std::size_t i) const {
        return {next_states.data() + i * obs_dim, static_cast<std::size_t>(obs_dim)};
    }
};

// Collect ~n_steps of experience (rounded up to whole episodes) with true
// rewards recorded; used for expert training only.
RolloutBuffer collect_rollout(const EnvSpec& spec, const GaussianPolicy& policy,
                              std::size_t n_steps, Rng& rng);

// Reward-free collection for imitation: rewards are left at zero for the
// adversary to fill in.
RolloutBuffer collect_rollout(const ObservationEnv& env, const GaussianPolicy& policy,
                              std::size_t n_steps, Rng& rng);

// Fill `values` and per-episode bootstrap values from the value function.
void fill_values(RolloutBuffer& buffer, const ValueFunction& vf);

// Generalized advantage estimation:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminal_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - terminal_t) * A_{t+1}
// with V(s_{t+1}) at an episode's last step taken from the bootstrap value.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

// In-place normalization to zero mean, unit standard deviation.
void normalize_advantages(RolloutBuffer& buffer);

// Mean undiscounted true-reward return of the episodes in the buffer.
double mean_episode_return(const RolloutBuffer& buffer);

}  // namespace fvim
