#include "fvim/policy.hpp"

#include <cmath>

namespace fvim {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

GaussianPolicy make_policy(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng) {
    GaussianPolicy policy;
    policy.spec = {obs_dim, hidden, act_dim};
    policy.mean_params = init_params(policy.spec, rng);
    policy.log_std.assign(static_cast<std::size_t>(act_dim), kLogStdInit);
    return policy;
}

ActionSample sample_action(const GaussianPolicy& policy, std::span<const double> state, Rng& rng) {
    std::vector<double> mean = net_forward(policy.spec, policy.mean_params, state);
    ActionSample sample;
    sample.action.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        sample.action[i] = mean[i] + std::exp(policy.log_std[i]) * rng.normal();
    sample.log_prob = action_log_prob(policy, mean, sample.action);
    return sample;
}

double action_log_prob(const GaussianPolicy& policy, std::span<const double> mean,
                       std::span<const double> action) {
    double lp = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double z = (action[i] - mean[i]) * std::exp(-policy.log_std[i]);
        lp += -0.5 * z * z - policy.log_std[i] - 0.5 * kLog2Pi;
    }
    return lp;
}

double policy_entropy(const GaussianPolicy& policy) {
    double h = 0.0;
    for (double ls : policy.log_std) h += ls + 0.5 * (kLog2Pi + 1.0);
    return h;
}

ValueFunction make_value_function(int obs_dim, const std::vector<int>& hidden, Rng& rng) {
    ValueFunction vf;
    vf.spec = {obs_dim, hidden, 1};
    vf.params = init_params(vf.spec, rng);
    return vf;
}

double value_of(const ValueFunction& vf, std::span<const double> state) {
    return net_forward(vf.spec, vf.params, state)[0];
}

}  // namespace fvim
