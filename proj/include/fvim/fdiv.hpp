#pragma once

#include <string_view>

#include "fvim/jet.hpp"

namespace fvim {

enum class DivergenceKind { TotalVariation, KL, ReverseKL, GAN };

const char* kind_name(DivergenceKind kind);
DivergenceKind kind_from_name(std::string_view name);

// Interval over the extended reals; open bounds excluded.
struct Interval {
    double lower;
    double upper;
    bool lower_open;
    bool upper_open;

    bool contains(double t) const {
        if (lower_open ? !(t > lower) : !(t >= lower)) return false;
        if (upper_open ? !(t < upper) : !(t <= upper)) return false;
        return true;
    }
};

// One divergence row: the generator, its convex conjugate, the conjugate's
// inverse, and the domains the conjugate pair lives on.
struct DivergenceSpec {
    DivergenceKind kind;
    Interval conjugate_domain;
    Interval inverse_domain;
};

DivergenceSpec divergence_spec(DivergenceKind kind);

// f(u) for u > 0. The GAN generator carries the usual -log(4) offset at u=1;
// the other three satisfy f(1) = 0.
double generator(DivergenceKind kind, double u);

// f*(t) on conjugate_domain. conjugate(KL, t) refuses t > 700 with
// std::overflow_error instead of silently returning infinity.
double conjugate(DivergenceKind kind, double t);

// f*^{-1}(t) on inverse_domain.
double conjugate_inverse(DivergenceKind kind, double t);

// The f-GAN output activation g_f; total on the reals.
double original_activation(DivergenceKind kind, double v);

// Bounded reward r(v): sigmoid(v), halved for Total Variation so it stays
// inside the inverse-conjugate domain.
double reward_map(DivergenceKind kind, double v);

// The reparameterized activation f*^{-1}(r(v)); finite for all finite v.
double reparam_activation(DivergenceKind kind, double v);

// Jet-valued building blocks for the variational objectives. Each is the
// numerically stable closed form of the composition it names; the double API
// above routes through these so values and derivatives share one definition.
Jet2 fd_original_activation(DivergenceKind kind, Jet2 v);        // g_f(v)
Jet2 fd_conjugate_of_original(DivergenceKind kind, Jet2 v);      // f*(g_f(v))
Jet2 fd_reward(DivergenceKind kind, Jet2 v);                     // r(v)
Jet2 fd_reparam_activation(DivergenceKind kind, Jet2 v);         // f*^{-1}(r(v))
Jet2 fd_neg_sigmoid(Jet2 v);                                     // swapped-bound g_f
Jet2 fd_conjugate_of_neg_sigmoid(DivergenceKind kind, Jet2 v);   // f*(-sigmoid(v))

}  // namespace fvim
