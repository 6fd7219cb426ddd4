#include "fvim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvim/errors.hpp"

namespace fvim {

namespace {

void clamp_log_std(GaussianPolicy& policy) {
    for (double& ls : policy.log_std) ls = std::clamp(ls, kLogStdMin, kLogStdMax);
}

void check_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + ": non-finite loss");
}

struct MinibatchGrads {
    std::vector<double> mean;
    std::vector<double> log_std;
    std::vector<double> value;
};

}  // namespace

PolicyOptimizer make_policy_optimizer(const GaussianPolicy& policy, const ValueFunction& vf,
                                      const PPOConfig& config) {
    PolicyOptimizer opt;
    opt.mean = make_adam(policy.mean_params.size(), config.policy_lr);
    opt.log_std = make_adam(policy.log_std.size(), config.policy_lr);
    opt.value = make_adam(vf.params.size(), config.value_lr);
    return opt;
}

PPOStats ppo_update(GaussianPolicy& policy, ValueFunction& vf, PolicyOptimizer& opt,
                    RolloutBuffer& buffer, const PPOConfig& config, Rng& rng) {
    const std::size_t n = buffer.size();
    if (buffer.advantages.size() != n || buffer.returns_to_go.size() != n)
        throw std::invalid_argument("ppo_update: buffer missing advantages/returns");
    if (config.advantage_normalization) normalize_advantages(buffer);

    const bool reinforce = config.update_rule == PolicyUpdateRule::Reinforce;
    const int epochs = reinforce ? 1 : config.ppo_epochs;
    const std::size_t mb_size = static_cast<std::size_t>(config.minibatch_size);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    PPOStats stats;
    std::size_t n_minibatches = 0;
    double ratio_sum = 0.0, clip_count = 0.0, sample_count = 0.0;

    MinibatchGrads grads;
    grads.mean.resize(policy.mean_params.size());
    grads.log_std.resize(policy.log_std.size());
    grads.value.resize(vf.params.size());

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Fisher-Yates shuffle driven by our own stream for reproducibility.
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.uniform_int(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += mb_size) {
            const std::size_t stop = std::min(start + mb_size, n);
            const double batch = static_cast<double>(stop - start);
            std::fill(grads.mean.begin(), grads.mean.end(), 0.0);
            std::fill(grads.log_std.begin(), grads.log_std.end(), 0.0);
            std::fill(grads.value.begin(), grads.value.end(), 0.0);
            double surrogate = 0.0, vloss = 0.0;

            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                const double adv = buffer.advantages[i];

                NetTrace trace = net_forward_trace(policy.spec, policy.mean_params, buffer.state(i));
                const std::vector<double>& mean = trace.output;
                const auto action = buffer.action(i);
                const double new_lp = action_log_prob(policy, mean, action);
                const double ratio = reinforce ? 1.0 : std::exp(new_lp - buffer.log_probs[i]);

                double dobj_dlp;  // d(objective)/d(new log-prob) for this sample
                if (reinforce) {
                    surrogate += new_lp * adv / batch;
                    dobj_dlp = adv;
                } else {
                    const double clipped =
                        std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio);
                    const double unclipped_term = ratio * adv;
                    const double clipped_term = clipped * adv;
                    surrogate += std::min(unclipped_term, clipped_term) / batch;
                    dobj_dlp = unclipped_term <= clipped_term ? ratio * adv : 0.0;
                    ratio_sum += ratio;
                    if (std::abs(ratio - 1.0) > config.clip_ratio) clip_count += 1.0;
                    sample_count += 1.0;
                }

                // Backprop the objective through the Gaussian log density.
                std::vector<double> cot(mean.size());
                for (std::size_t d = 0; d < mean.size(); ++d) {
                    const double inv_var = std::exp(-2.0 * policy.log_std[d]);
                    const double diff = action[d] - mean[d];
                    cot[d] = dobj_dlp * diff * inv_var / batch;
                    grads.log_std[d] += dobj_dlp * (diff * diff * inv_var - 1.0) / batch;
                }
                net_backward_accum(policy.spec, policy.mean_params, trace, cot, 1.0, grads.mean);

                // Value regression toward the empirical return.
                NetTrace vtrace = net_forward_trace(vf.spec, vf.params, buffer.state(i));
                const double err = vtrace.output[0] - buffer.returns_to_go[i];
                vloss += err * err / batch;
                const double vcot[1] = {2.0 * err / batch};
                net_backward_accum(vf.spec, vf.params, vtrace, vcot, 1.0, grads.value);
            }

            const double entropy = policy_entropy(policy);
            const double objective = surrogate + config.entropy_coef * entropy;
            check_finite(objective, "ppo_update surrogate");
            check_finite(vloss, "ppo_update value");
            for (std::size_t d = 0; d < grads.log_std.size(); ++d)
                grads.log_std[d] += config.entropy_coef;

            // Ascend the objective, descend value loss.
            for (double& g : grads.mean) g = -g;
            for (double& g : grads.log_std) g = -g;
            adam_step(opt.mean, policy.mean_params, grads.mean);
            adam_step(opt.log_std, policy.log_std, grads.log_std);
            clamp_log_std(policy);
            adam_step(opt.value, vf.params, grads.value);

            stats.policy_loss += -objective;
            stats.value_loss += vloss;
            n_minibatches += 1;
        }
    }

    if (n_minibatches > 0) {
        stats.policy_loss /= static_cast<double>(n_minibatches);
        stats.value_loss /= static_cast<double>(n_minibatches);
    }
    stats.mean_ratio = sample_count > 0.0 ? ratio_sum / sample_count : 1.0;
    stats.clip_fraction = sample_count > 0.0 ? clip_count / sample_count : 0.0;
    stats.entropy = policy_entropy(policy);
    return stats;
}

ExpertResult train_expert(const EnvSpec& spec, const PPOConfig& config, int n_iterations,
                          std::size_t steps_per_iteration, std::uint64_t seed,
                          const std::vector<int>& hidden) {
    Rng rng(mix_seed(seed, 0x45585045));  // "EXPE"
    ExpertResult result;
    result.policy = make_policy(spec.obs_dim, spec.act_dim, hidden, rng);
    result.value = make_value_function(spec.obs_dim, hidden, rng);
    PolicyOptimizer opt = make_policy_optimizer(result.policy, result.value, config);

    for (int iter = 0; iter < n_iterations; ++iter) {
        RolloutBuffer buffer = collect_rollout(spec, result.policy, steps_per_iteration, rng);
        fill_values(buffer, result.value);
        compute_gae(buffer, config.gamma, config.gae_lambda);
        result.return_curve.push_back(mean_episode_return(buffer));
        ppo_update(result.policy, result.value, opt, buffer, config, rng);
    }
    return result;
}

EvalResult evaluate_policy(const GaussianPolicy& policy, const EnvSpec& spec, int n_episodes,
                           std::uint64_t seed) {
    if (n_episodes < 1) throw std::invalid_argument("evaluate_policy: n_episodes must be >= 1");
    Rng rng(mix_seed(seed, 0x4556414c));  // "EVAL"
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(n_episodes));
    for (int ep = 0; ep < n_episodes; ++ep) {
        EnvState state = env_reset(spec, rng);
        std::vector<double> obs = env_observe(spec, state);
        double total = 0.0;
        bool done = false;
        while (!done) {
            ActionSample sample = sample_action(policy, obs, rng);
            StepResult step = env_step(spec, state, sample.action);
            total += step.reward;
            state = std::move(step.state);
            obs = std::move(step.obs);
            done = step.done;
        }
        returns.push_back(total);
    }
    EvalResult res;
    for (double r : returns) res.mean_return += r;
    res.mean_return /= static_cast<double>(n_episodes);
    double var = 0.0;
    for (double r : returns) var += (r - res.mean_return) * (r - res.mean_return);
    res.std_return = std::sqrt(var / static_cast<double>(n_episodes));
    return res;
}

}  // namespace fvim
