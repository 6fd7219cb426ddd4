#pragma once

#include <span>
#include <vector>

#include "fvim/net.hpp"
#include "fvim/rng.hpp"

namespace fvim {

// Diagonal Gaussian policy: a network for the mean, one free state-independent
// log standard deviation per action dimension.
struct GaussianPolicy {
    NetSpec spec;  // obs_dim -> act_dim
    ParamVector mean_params;
    std::vector<double> log_std;
};

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kLogStdInit = -0.5;

GaussianPolicy make_policy(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng);

struct ActionSample {
    std::vector<double> action;
    double log_prob = 0.0;
};

ActionSample sample_action(const GaussianPolicy& policy, std::span<const double> state, Rng& rng);

// Log density of `action` under the Gaussian with the given mean and the
// policy's current log_std.
double action_log_prob(const GaussianPolicy& policy, std::span<const double> mean,
                       std::span<const double> action);

// Differential entropy of the action distribution (state-independent).
double policy_entropy(const GaussianPolicy& policy);

struct ValueFunction {
    NetSpec spec;  // obs_dim -> 1
    ParamVector params;
};

ValueFunction make_value_function(int obs_dim, const std::vector<int>& hidden, Rng& rng);
double value_of(const ValueFunction& vf, std::span<const double> state);

}  // namespace fvim
