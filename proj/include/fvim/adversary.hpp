#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fvim/fdiv.hpp"
#include "fvim/net.hpp"

namespace fvim {

enum class PairMode { StateAction, StateTransition };

const char* pair_mode_name(PairMode mode);
PairMode pair_mode_from_name(std::string_view name);

// Which variational bound the discriminator optimizes. Reparameterized is
// the bounded-reward form; OriginalFGAN keeps the f-GAN activations (and with
// the GAN divergence recovers GAIL/GAIFO exactly); SwappedBound puts the
// agent distribution in the first slot with g_f(u) = -sigmoid(u).
enum class LossVariant { Reparameterized, OriginalFGAN, SwappedBound };

const char* variant_name(LossVariant variant);
LossVariant variant_from_name(std::string_view name);

// Whether the squared-norm penalty differentiates the activated output with
// respect to discriminator parameters (as the regularizer is written) or with
// respect to the pair input.
enum class PenaltyMode { Params, Inputs };

struct RegConfig {
    double psi = 10.0;
    std::optional<double> grad_clip_threshold;
    PenaltyMode penalty_mode = PenaltyMode::Params;
};

struct Discriminator {
    NetSpec spec;  // pair_dim -> 1
    ParamVector params;
    PairMode mode = PairMode::StateAction;
};

Discriminator make_discriminator(int obs_dim, int act_dim, PairMode mode,
                                 const std::vector<int>& hidden, Rng& rng);

// Dense batch of discriminator inputs, one pair per row.
struct PairBatch {
    int dim = 0;
    std::size_t count = 0;
    std::vector<double> flat;

    void reserve_rows(std::size_t n) { flat.reserve(n * static_cast<std::size_t>(dim)); }
    void push(std::span<const double> first, std::span<const double> second);
    std::span<const double> row(std::size_t i) const {
        return {flat.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

double disc_value(const Discriminator& disc, std::span<const double> pair);

// Per-sample scalar terms of the chosen bound, as jets in V. The objective is
// mean over expert of expert_term minus mean over agent of agent_term; the
// agent term doubles as the per-timestep reward in every variant.
Jet2 expert_term(DivergenceKind kind, LossVariant variant, Jet2 v);
Jet2 agent_term(DivergenceKind kind, LossVariant variant, Jet2 v);

// Value of the bound to be maximized. Domain and overflow errors from the
// divergence maps propagate; callers treat them as stability events.
double disc_objective(const Discriminator& disc, DivergenceKind kind, LossVariant variant,
                      const PairBatch& expert, const PairBatch& agent);

// (psi/2) * mean over expert pairs of squared gradient norm of the
// reparameterized activation of V.
double grad_penalty(const Discriminator& disc, DivergenceKind kind, const PairBatch& expert,
                    double psi, PenaltyMode mode = PenaltyMode::Params);

struct DiscStats {
    double objective = 0.0;
    double penalty = 0.0;
    double grad_norm_raw = 0.0;
    double grad_norm_applied = 0.0;
};

// One ascent step on (objective - penalty), run as Adam descent on the
// negation, with optional gradient-norm rescaling before the step.
DiscStats disc_update(Discriminator& disc, DivergenceKind kind, LossVariant variant,
                      const PairBatch& expert, const PairBatch& agent, const RegConfig& reg,
                      AdamState& opt);

// Per-timestep rewards for the policy side.
std::vector<double> reward_batch(const Discriminator& disc, DivergenceKind kind,
                                 LossVariant variant, const PairBatch& transitions);

}  // namespace fvim
