#include "fvim/adversary.hpp"

#include <cmath>
#include <stdexcept>

#include "fvim/errors.hpp"

namespace fvim {

const char* pair_mode_name(PairMode mode) {
    return mode == PairMode::StateAction ? "state_action" : "state_transition";
}

PairMode pair_mode_from_name(std::string_view name) {
    if (name == "state_action") return PairMode::StateAction;
    if (name == "state_transition") return PairMode::StateTransition;
    throw std::invalid_argument("unknown pair mode: " + std::string(name));
}

const char* variant_name(LossVariant variant) {
    switch (variant) {
        case LossVariant::Reparameterized: return "reparameterized";
        case LossVariant::OriginalFGAN: return "original";
        case LossVariant::SwappedBound: return "swapped";
    }
    return "?";
}

LossVariant variant_from_name(std::string_view name) {
    if (name == "reparameterized") return LossVariant::Reparameterized;
    if (name == "original") return LossVariant::OriginalFGAN;
    if (name == "swapped") return LossVariant::SwappedBound;
    throw std::invalid_argument("unknown loss variant: " + std::string(name));
}

Discriminator make_discriminator(int obs_dim, int act_dim, PairMode mode,
                                 const std::vector<int>& hidden, Rng& rng) {
    Discriminator disc;
    const int pair_dim = mode == PairMode::StateAction ? obs_dim + act_dim : 2 * obs_dim;
    disc.spec = {pair_dim, hidden, 1};
    disc.params = init_params(disc.spec, rng);
    disc.mode = mode;
    return disc;
}

void PairBatch::push(std::span<const double> first, std::span<const double> second) {
    if (first.size() + second.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("PairBatch::push: pair does not match dim");
    flat.insert(flat.end(), first.begin(), first.end());
    flat.insert(flat.end(), second.begin(), second.end());
    count += 1;
}

double disc_value(const Discriminator& disc, std::span<const double> pair) {
    return net_forward(disc.spec, disc.params, pair)[0];
}

Jet2 expert_term(DivergenceKind kind, LossVariant variant, Jet2 v) {
    switch (variant) {
        case LossVariant::Reparameterized: return fd_reparam_activation(kind, v);
        case LossVariant::OriginalFGAN: return fd_original_activation(kind, v);
        // Swapped bound, rewritten as E_expert[.] - E_agent[.]:
        //   E_agent[g] - E_expert[f*(g)] = E_expert[-f*(g)] - E_agent[-g].
        case LossVariant::SwappedBound: return -fd_conjugate_of_neg_sigmoid(kind, v);
    }
    throw std::logic_error("unreachable");
}

Jet2 agent_term(DivergenceKind kind, LossVariant variant, Jet2 v) {
    switch (variant) {
        case LossVariant::Reparameterized: return fd_reward(kind, v);
        case LossVariant::OriginalFGAN: return fd_conjugate_of_original(kind, v);
        case LossVariant::SwappedBound: return -fd_neg_sigmoid(v);
    }
    throw std::logic_error("unreachable");
}

namespace {

void check_batches(const Discriminator& disc, const PairBatch& expert, const PairBatch& agent) {
    if (expert.count == 0 || agent.count == 0)
        throw std::invalid_argument("discriminator batches must be non-empty");
    if (expert.dim != disc.spec.input_dim || agent.dim != disc.spec.input_dim)
        throw std::invalid_argument("pair width does not match discriminator input");
}

// Objective value and (optionally) its ascent gradient in one sweep.
double objective_impl(const Discriminator& disc, DivergenceKind kind, LossVariant variant,
                      const PairBatch& expert, const PairBatch& agent,
                      std::vector<double>* grad_out) {
    check_batches(disc, expert, agent);
    double objective = 0.0;
    const double we = 1.0 / static_cast<double>(expert.count);
    const double wa = 1.0 / static_cast<double>(agent.count);
    for (std::size_t i = 0; i < expert.count; ++i) {
        NetTrace trace = net_forward_trace(disc.spec, disc.params, expert.row(i));
        Jet2 term = expert_term(kind, variant, jet_var(trace.output[0]));
        objective += we * term.v;
        if (grad_out) {
            const double cot[1] = {term.d1};
            net_backward_accum(disc.spec, disc.params, trace, cot, we, *grad_out);
        }
    }
    for (std::size_t i = 0; i < agent.count; ++i) {
        NetTrace trace = net_forward_trace(disc.spec, disc.params, agent.row(i));
        Jet2 term = agent_term(kind, variant, jet_var(trace.output[0]));
        objective -= wa * term.v;
        if (grad_out) {
            const double cot[1] = {term.d1};
            net_backward_accum(disc.spec, disc.params, trace, cot, -wa, *grad_out);
        }
    }
    if (!std::isfinite(objective))
        throw NonFiniteError("disc_objective: non-finite objective value");
    return objective;
}

// Penalty value; when grad_out is given, adds the penalty gradient (with
// respect to parameters) into it. Exact second-order products via the dual
// forward/backward sweeps.
//
// Params mode is the regularizer exactly as the objective writes it: the
// squared parameter gradient of the activated output f*^{-1}(r(V)). Inputs
// mode is the conventional form the literature penalizes: the squared input
// gradient of the raw discriminator output V.
double penalty_impl(const Discriminator& disc, DivergenceKind kind, const PairBatch& expert,
                    double psi, PenaltyMode mode, std::vector<double>* grad_out) {
    if (psi == 0.0) return 0.0;
    if (expert.count == 0) throw std::invalid_argument("grad_penalty: empty expert batch");
    const double w = 1.0 / static_cast<double>(expert.count);
    const std::size_t n_params = disc.params.size();
    double penalty = 0.0;
    std::vector<double> zeros_params(n_params, 0.0);
    std::vector<double> zeros_input(static_cast<std::size_t>(disc.spec.input_dim), 0.0);
    for (std::size_t i = 0; i < expert.count; ++i) {
        NetTrace trace = net_forward_trace(disc.spec, disc.params, expert.row(i));
        Jet2 act = mode == PenaltyMode::Params
                       ? fd_reparam_activation(kind, jet_var(trace.output[0]))
                       : jet_var(trace.output[0]);
        const double cot[1] = {act.d1};
        NetGradients g = net_backward(disc.spec, disc.params, trace, cot);
        const std::vector<double>& direction = mode == PenaltyMode::Params ? g.params : g.input;
        double sq = 0.0;
        for (double x : direction) sq += x * x;
        penalty += 0.5 * psi * w * sq;
        if (!grad_out) continue;

        // d/domega (1/2)||g||^2 = (d g / d omega) g: push g through as the
        // dual direction and read off the dual part of the parameter grads.
        const std::vector<double>& dir_params =
            mode == PenaltyMode::Params ? direction : zeros_params;
        const std::vector<double>& dir_input =
            mode == PenaltyMode::Params ? zeros_input : direction;
        DualTrace dual =
            net_forward_dual(disc.spec, disc.params, dir_params, expert.row(i), dir_input);
        const double vdot = dual.output_dot[0];
        const double cot_dot[1] = {act.d2 * vdot};
        DualNetGradients dg =
            net_backward_dual(disc.spec, disc.params, dir_params, dual, cot, cot_dot);
        for (std::size_t p = 0; p < n_params; ++p)
            (*grad_out)[p] += psi * w * dg.params_dot[p];
    }
    if (!std::isfinite(penalty)) throw NonFiniteError("grad_penalty: non-finite penalty value");
    return penalty;
}

}  // namespace

double disc_objective(const Discriminator& disc, DivergenceKind kind, LossVariant variant,
                      const PairBatch& expert, const PairBatch& agent) {
    return objective_impl(disc, kind, variant, expert, agent, nullptr);
}

double grad_penalty(const Discriminator& disc, DivergenceKind kind, const PairBatch& expert,
                    double psi, PenaltyMode mode) {
    if (psi < 0.0) throw std::invalid_argument("grad_penalty: psi must be >= 0");
    return penalty_impl(disc, kind, expert, psi, mode, nullptr);
}

DiscStats disc_update(Discriminator& disc, DivergenceKind kind, LossVariant variant,
                      const PairBatch& expert, const PairBatch& agent, const RegConfig& reg,
                      AdamState& opt) {
    DiscStats stats;
    std::vector<double> ascent(disc.params.size(), 0.0);
    stats.objective = objective_impl(disc, kind, variant, expert, agent, &ascent);
    if (reg.psi > 0.0) {
        std::vector<double> penalty_grad(disc.params.size(), 0.0);
        stats.penalty =
            penalty_impl(disc, kind, expert, reg.psi, reg.penalty_mode, &penalty_grad);
        for (std::size_t i = 0; i < ascent.size(); ++i) ascent[i] -= penalty_grad[i];
    }

    // Adam descends, so feed it the negated ascent direction.
    std::vector<double>& loss_grad = ascent;
    for (double& g : loss_grad) g = -g;

    double norm_sq = 0.0;
    for (double g : loss_grad) norm_sq += g * g;
    stats.grad_norm_raw = std::sqrt(norm_sq);
    if (!std::isfinite(stats.grad_norm_raw))
        throw NonFiniteError("disc_update: non-finite gradient norm");
    stats.grad_norm_applied = stats.grad_norm_raw;
    if (reg.grad_clip_threshold && stats.grad_norm_raw > *reg.grad_clip_threshold) {
        const double scale = *reg.grad_clip_threshold / stats.grad_norm_raw;
        for (double& g : loss_grad) g *= scale;
        stats.grad_norm_applied = *reg.grad_clip_threshold;
    }
    adam_step(opt, disc.params, loss_grad);
    return stats;
}

std::vector<double> reward_batch(const Discriminator& disc, DivergenceKind kind,
                                 LossVariant variant, const PairBatch& transitions) {
    if (transitions.dim != disc.spec.input_dim)
        throw std::invalid_argument("reward_batch: pair width does not match discriminator");
    std::vector<double> rewards(transitions.count);
    for (std::size_t i = 0; i < transitions.count; ++i) {
        const double v = disc_value(disc, transitions.row(i));
        rewards[i] = agent_term(kind, variant, jet_const(v)).v;
    }
    return rewards;
}

}  // namespace fvim
