#include "fvim/imitate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fvim {

std::size_t DemoDataset::pair_count() const {
    std::size_t n = 0;
    for (const auto& traj : trajectories) {
        if (mode == PairMode::StateAction)
            n += traj.states.size();
        else
            n += traj.states.empty() ? 0 : traj.states.size() - 1;
    }
    return n;
}

DemoDataset generate_demos(const GaussianPolicy& expert, const EnvSpec& spec,
                           int n_trajectories, std::uint64_t seed) {
    if (n_trajectories < 1) throw std::invalid_argument("generate_demos: need >= 1 trajectory");
    DemoDataset demos;
    demos.env_id = spec.env_id;
    demos.mode = PairMode::StateAction;
    demos.source_seed = seed;
    Rng rng(mix_seed(seed, 0x44454d4f));  // "DEMO"
    for (int k = 0; k < n_trajectories; ++k) {
        DemoTrajectory traj;
        EnvState state = env_reset(spec, rng);
        std::vector<double> obs = env_observe(spec, state);
        bool done = false;
        while (!done) {
            ActionSample sample = sample_action(expert, obs, rng);
            StepResult step = env_step(spec, state, sample.action);
            traj.states.push_back(obs);
            traj.actions.push_back(sample.action);
            state = std::move(step.state);
            obs = std::move(step.obs);
            done = step.done;
        }
        demos.trajectories.push_back(std::move(traj));
    }
    return demos;
}

DemoDataset strip_actions(const DemoDataset& demos) {
    if (demos.mode != PairMode::StateAction)
        throw std::invalid_argument("strip_actions: dataset is already state-transition");
    DemoDataset stripped;
    stripped.env_id = demos.env_id;
    stripped.mode = PairMode::StateTransition;
    stripped.source_seed = demos.source_seed;
    for (const auto& traj : demos.trajectories) {
        DemoTrajectory t;
        t.states = traj.states;
        stripped.trajectories.push_back(std::move(t));
    }
    return stripped;
}

DemoDataset subsample(const DemoDataset& demos, int k, std::uint64_t seed) {
    const int total = static_cast<int>(demos.trajectories.size());
    if (k < 1 || k > total) {
        std::ostringstream os;
        os << "subsample: k=" << k << " outside [1, " << total << "]";
        throw std::invalid_argument(os.str());
    }
    std::vector<int> index(total);
    std::iota(index.begin(), index.end(), 0);
    Rng rng(mix_seed(seed, 0x53554253));  // "SUBS"
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(total - i)));
        std::swap(index[i], index[j]);
    }
    index.resize(k);
    std::sort(index.begin(), index.end());
    DemoDataset out;
    out.env_id = demos.env_id;
    out.mode = demos.mode;
    out.source_seed = demos.source_seed;
    for (int i : index) out.trajectories.push_back(demos.trajectories[i]);
    return out;
}

PairBatch demo_pair_batch(const DemoDataset& demos) {
    PairBatch batch;
    if (demos.trajectories.empty()) return batch;
    if (demos.mode == PairMode::StateAction) {
        batch.dim = static_cast<int>(demos.trajectories[0].states[0].size() +
                                     demos.trajectories[0].actions[0].size());
        batch.reserve_rows(demos.pair_count());
        for (const auto& traj : demos.trajectories)
            for (std::size_t t = 0; t < traj.states.size(); ++t)
                batch.push(traj.states[t], traj.actions[t]);
    } else {
        batch.dim = static_cast<int>(2 * demos.trajectories[0].states[0].size());
        batch.reserve_rows(demos.pair_count());
        for (const auto& traj : demos.trajectories)
            for (std::size_t t = 0; t + 1 < traj.states.size(); ++t)
                batch.push(traj.states[t], traj.states[t + 1]);
    }
    return batch;
}

namespace {

PairBatch rollout_pair_batch(const RolloutBuffer& buffer, PairMode mode) {
    PairBatch batch;
    batch.dim = mode == PairMode::StateAction ? buffer.obs_dim + buffer.act_dim
                                              : 2 * buffer.obs_dim;
    batch.reserve_rows(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        if (mode == PairMode::StateAction)
            batch.push(buffer.state(i), buffer.action(i));
        else
            batch.push(buffer.state(i), buffer.next_state(i));
    }
    return batch;
}

PairBatch gather_rows(const PairBatch& src, const std::vector<std::size_t>& rows,
                      std::size_t begin, std::size_t end) {
    PairBatch out;
    out.dim = src.dim;
    out.reserve_rows(end - begin);
    for (std::size_t k = begin; k < end; ++k) out.push(src.row(rows[k]), {});
    return out;
}

TrainResult train_imitation(const EnvSpec& spec, const DemoDataset& demos,
                            const TrainerConfig& config, PairMode mode) {
    if (demos.mode != mode)
        throw std::invalid_argument(std::string("trainer expects ") + pair_mode_name(mode) +
                                    " demos, got " + pair_mode_name(demos.mode));
    if (demos.env_id != spec.env_id)
        throw std::invalid_argument("demo dataset env_id does not match environment");

    Rng rng(mix_seed(config.seed, 0x494d4954));  // "IMIT"
    ObservationEnv env(spec);

    TrainResult result;
    result.policy = make_policy(spec.obs_dim, spec.act_dim, config.policy_hidden, rng);
    ValueFunction value = make_value_function(spec.obs_dim, config.policy_hidden, rng);
    Discriminator disc =
        make_discriminator(spec.obs_dim, spec.act_dim, mode, config.disc_hidden, rng);
    PolicyOptimizer policy_opt = make_policy_optimizer(result.policy, value, config.ppo);
    AdamState disc_opt = make_adam(disc.params.size(), config.disc_lr);

    const PairBatch expert_all = demo_pair_batch(demos);
    if (expert_all.count == 0) throw std::invalid_argument("empty demo dataset");

    std::uint64_t env_steps = 0;
    for (int iter = 0; iter < config.n_iterations; ++iter) {
        IterationRow row;
        row.iteration = iter;
        try {
            RolloutBuffer buffer =
                collect_rollout(env, result.policy, config.steps_per_iteration, rng);
            env_steps += buffer.size();
            row.env_steps = env_steps;
            PairBatch agent_all = rollout_pair_batch(buffer, mode);

            // Discriminator epochs: the full expert set against an equal-size
            // uniform subsample of this iteration's rollout, minibatched.
            const std::size_t n_expert = expert_all.count;
            std::vector<std::size_t> expert_order(n_expert);
            std::iota(expert_order.begin(), expert_order.end(), std::size_t{0});
            double obj_sum = 0.0, pen_sum = 0.0, raw_sum = 0.0, applied_sum = 0.0;
            std::size_t n_updates = 0;
            for (int epoch = 0; epoch < config.disc_epochs; ++epoch) {
                for (std::size_t i = n_expert; i > 1; --i)
                    std::swap(expert_order[i - 1], expert_order[rng.uniform_int(i)]);
                std::vector<std::size_t> agent_pick(n_expert);
                if (agent_all.count >= n_expert) {
                    std::vector<std::size_t> agent_order(agent_all.count);
                    std::iota(agent_order.begin(), agent_order.end(), std::size_t{0});
                    for (std::size_t i = agent_all.count; i > 1; --i)
                        std::swap(agent_order[i - 1], agent_order[rng.uniform_int(i)]);
                    std::copy_n(agent_order.begin(), n_expert, agent_pick.begin());
                } else {
                    for (std::size_t i = 0; i < n_expert; ++i)
                        agent_pick[i] = rng.uniform_int(agent_all.count);
                }
                const std::size_t mb = static_cast<std::size_t>(config.disc_minibatch);
                for (std::size_t start = 0; start < n_expert; start += mb) {
                    const std::size_t stop = std::min(start + mb, n_expert);
                    PairBatch expert_mb = gather_rows(expert_all, expert_order, start, stop);
                    PairBatch agent_mb = gather_rows(agent_all, agent_pick, start, stop);
                    DiscStats stats = disc_update(disc, config.kind, config.variant, expert_mb,
                                                  agent_mb, config.reg, disc_opt);
                    obj_sum += stats.objective;
                    pen_sum += stats.penalty;
                    raw_sum += stats.grad_norm_raw;
                    applied_sum += stats.grad_norm_applied;
                    n_updates += 1;
                }
            }
            if (n_updates > 0) {
                row.disc_objective = obj_sum / static_cast<double>(n_updates);
                row.penalty = pen_sum / static_cast<double>(n_updates);
                row.grad_norm_raw = raw_sum / static_cast<double>(n_updates);
                row.grad_norm_applied = applied_sum / static_cast<double>(n_updates);
            }

            // Label the rollout with adversarial rewards and take the policy step.
            std::vector<double> rewards =
                reward_batch(disc, config.kind, config.variant, agent_all);
            buffer.rewards = rewards;
            double reward_mean = 0.0;
            for (double r : rewards) reward_mean += r;
            row.mean_adv_reward = reward_mean / static_cast<double>(rewards.size());

            fill_values(buffer, value);
            compute_gae(buffer, config.ppo.gamma, config.ppo.gae_lambda);
            ppo_update(result.policy, value, policy_opt, buffer, config.ppo, rng);

            EvalResult eval = evaluate_policy(result.policy, spec, config.eval_episodes,
                                              mix_seed(config.seed, 0xa000 + iter));
            row.mean_true_return = eval.mean_return;
            row.std_true_return = eval.std_return;
            result.curve.push_back(row);
        } catch (const std::overflow_error& e) {
            row.stability_event = e.what();
        } catch (const std::domain_error& e) {
            row.stability_event = e.what();
        } catch (const NonFiniteError& e) {
            row.stability_event = e.what();
        }
        if (!row.stability_event.empty()) {
            result.events.push_back({iter, row.stability_event});
            result.curve.push_back(row);
            break;  // graceful termination; partial curve is the outcome
        }
    }
    return result;
}

}  // namespace

TrainResult train_fvim(const EnvSpec& spec, const DemoDataset& demos,
                       const TrainerConfig& config) {
    return train_imitation(spec, demos, config, PairMode::StateAction);
}

TrainResult train_fvimo(const EnvSpec& spec, const DemoDataset& demos,
                        const TrainerConfig& config) {
    return train_imitation(spec, demos, config, PairMode::StateTransition);
}

std::vector<SweepRow> demo_sweep(const EnvSpec& spec, const DemoDataset& demos,
                                 const TrainerConfig& config, const std::vector<int>& counts) {
    std::vector<SweepRow> rows;
    for (int count : counts) {
        SweepRow row;
        row.demo_count = count;
        try {
            DemoDataset subset =
                subsample(demos, count, mix_seed(config.seed, 0xC0 + static_cast<std::uint64_t>(count)));
            TrainerConfig cell = config;
            cell.seed = mix_seed(config.seed, 0xD0 + static_cast<std::uint64_t>(count));
            TrainResult result = demos.mode == PairMode::StateAction
                                     ? train_fvim(spec, subset, cell)
                                     : train_fvimo(spec, subset, cell);
            if (!result.events.empty()) {
                row.failed = true;
                row.note = result.events.front().description;
            }
            if (!result.curve.empty()) {
                row.final_mean_return = result.curve.back().mean_true_return;
                row.final_std_return = result.curve.back().std_true_return;
            }
        } catch (const std::exception& e) {
            row.failed = true;
            row.note = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fvim
