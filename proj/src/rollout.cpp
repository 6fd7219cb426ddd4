#include "fvim/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace fvim {

namespace {

void append_vec(std::vector<double>& dst, std::span<const double> src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

// One collection loop serving both entry points; `true_reward` decides
// whether StepResult rewards are recorded or zeros stored.
RolloutBuffer collect_impl(const EnvSpec& spec, const GaussianPolicy& policy,
                           std::size_t n_steps, Rng& rng, bool true_reward) {
    RolloutBuffer buf;
    buf.obs_dim = spec.obs_dim;
    buf.act_dim = spec.act_dim;
    while (buf.size() < n_steps) {
        EnvState state = env_reset(spec, rng);
        std::vector<double> obs = env_observe(spec, state);
        const std::size_t begin = buf.size();
        bool done = false;
        while (!done) {
            ActionSample sample = sample_action(policy, obs, rng);
            StepResult step = env_step(spec, state, sample.action);
            append_vec(buf.states, obs);
            append_vec(buf.actions, sample.action);
            append_vec(buf.next_states, step.obs);
            buf.log_probs.push_back(sample.log_prob);
            buf.rewards.push_back(true_reward ? step.reward : 0.0);
            buf.terminals.push_back(0);
            state = std::move(step.state);
            obs = std::move(step.obs);
            done = step.done;
        }
        buf.episodes.push_back({begin, buf.size(), 0.0});
    }
    return buf;
}

}  // namespace

RolloutBuffer collect_rollout(const EnvSpec& spec, const GaussianPolicy& policy,
                              std::size_t n_steps, Rng& rng) {
    return collect_impl(spec, policy, n_steps, rng, true);
}

RolloutBuffer collect_rollout(const ObservationEnv& env, const GaussianPolicy& policy,
                              std::size_t n_steps, Rng& rng) {
    return collect_impl(env.spec(), policy, n_steps, rng, false);
}

void fill_values(RolloutBuffer& buffer, const ValueFunction& vf) {
    buffer.values.resize(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i)
        buffer.values[i] = value_of(vf, buffer.state(i));
    for (auto& ep : buffer.episodes)
        ep.bootstrap_value = value_of(vf, buffer.next_state(ep.end - 1));
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
    if (buffer.values.size() != buffer.size())
        throw std::invalid_argument("compute_gae: values not filled");
    buffer.advantages.assign(buffer.size(), 0.0);
    buffer.returns_to_go.assign(buffer.size(), 0.0);
    for (const auto& ep : buffer.episodes) {
        double running = 0.0;
        for (std::size_t i = ep.end; i-- > ep.begin;) {
            const double nonterminal = buffer.terminals[i] ? 0.0 : 1.0;
            const double next_value = i + 1 < ep.end ? buffer.values[i + 1] : ep.bootstrap_value;
            const double delta =
                buffer.rewards[i] + gamma * next_value * nonterminal - buffer.values[i];
            running = delta + gamma * lambda * nonterminal * (i + 1 < ep.end ? running : 0.0);
            buffer.advantages[i] = running;
            buffer.returns_to_go[i] = running + buffer.values[i];
        }
    }
}

void normalize_advantages(RolloutBuffer& buffer) {
    const std::size_t n = buffer.advantages.size();
    if (n == 0) return;
    double mean = 0.0;
    for (double a : buffer.advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : buffer.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    const double std_dev = std::sqrt(var);
    if (std_dev == 0.0) {
        for (double& a : buffer.advantages) a = 0.0;
        return;
    }
    for (double& a : buffer.advantages) a = (a - mean) / std_dev;
}

double mean_episode_return(const RolloutBuffer& buffer) {
    if (buffer.episodes.empty()) return 0.0;
    double total = 0.0;
    for (const auto& ep : buffer.episodes)
        for (std::size_t i = ep.begin; i < ep.end; ++i) total += buffer.rewards[i];
    return total / static_cast<double>(buffer.episodes.size());
}

}  // namespace fvim
