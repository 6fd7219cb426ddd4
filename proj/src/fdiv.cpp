#include "fvim/fdiv.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fvim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Above this the KL conjugate exp(t-1) is treated as an overflow rather than
// evaluated; the margin below the IEEE limit keeps downstream squares honest.
constexpr double kKlConjugateMax = 700.0;

[[noreturn]] void domain_fail(const char* op, DivergenceKind kind, double value) {
    std::ostringstream os;
    os << op << ": argument " << value << " outside domain for " << kind_name(kind);
    throw std::domain_error(os.str());
}

// log(1 - exp(-x)) for x > 0, accurate near both ends.
double log1mexp(double x) {
    return x > 0.6931471805599453 ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

}  // namespace

const char* kind_name(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::TotalVariation: return "tv";
        case DivergenceKind::KL: return "kl";
        case DivergenceKind::ReverseKL: return "rkl";
        case DivergenceKind::GAN: return "gan";
    }
    return "?";
}

DivergenceKind kind_from_name(std::string_view name) {
    if (name == "tv") return DivergenceKind::TotalVariation;
    if (name == "kl") return DivergenceKind::KL;
    if (name == "rkl") return DivergenceKind::ReverseKL;
    if (name == "gan") return DivergenceKind::GAN;
    throw std::invalid_argument("unknown divergence kind: " + std::string(name));
}

DivergenceSpec divergence_spec(DivergenceKind kind) {
    switch (kind) {
        case DivergenceKind::TotalVariation:
            return {kind, {-0.5, 0.5, false, false}, {-0.5, 0.5, false, false}};
        case DivergenceKind::KL:
            return {kind, {-kInf, kInf, true, true}, {0.0, kInf, true, true}};
        case DivergenceKind::ReverseKL:
            return {kind, {-kInf, 0.0, true, true}, {-kInf, kInf, true, true}};
        case DivergenceKind::GAN:
            return {kind, {-kInf, 0.0, true, true}, {0.0, kInf, true, true}};
    }
    throw std::logic_error("unreachable");
}

double generator(DivergenceKind kind, double u) {
    if (!(u > 0.0)) domain_fail("generator", kind, u);
    switch (kind) {
        case DivergenceKind::TotalVariation: return 0.5 * std::abs(u - 1.0);
        case DivergenceKind::KL: return u * std::log(u);
        case DivergenceKind::ReverseKL: return -std::log(u);
        case DivergenceKind::GAN: return u * std::log(u) - (u + 1.0) * std::log(u + 1.0);
    }
    throw std::logic_error("unreachable");
}

double conjugate(DivergenceKind kind, double t) {
    if (!divergence_spec(kind).conjugate_domain.contains(t)) domain_fail("conjugate", kind, t);
    switch (kind) {
        case DivergenceKind::TotalVariation:
            return t;
        case DivergenceKind::KL:
            if (t > kKlConjugateMax) {
                std::ostringstream os;
                os << "conjugate(kl): exp(t-1) overflow at t=" << t;
                throw std::overflow_error(os.str());
            }
            return std::exp(t - 1.0);
        case DivergenceKind::ReverseKL:
            return -1.0 - std::log(-t);
        case DivergenceKind::GAN:
            return -log1mexp(-t);
    }
    throw std::logic_error("unreachable");
}

double conjugate_inverse(DivergenceKind kind, double t) {
    if (!divergence_spec(kind).inverse_domain.contains(t)) domain_fail("conjugate_inverse", kind, t);
    switch (kind) {
        case DivergenceKind::TotalVariation: return t;
        case DivergenceKind::KL: return 1.0 + std::log(t);
        case DivergenceKind::ReverseKL: return -std::exp(-1.0 - t);
        case DivergenceKind::GAN: return log1mexp(t);
    }
    throw std::logic_error("unreachable");
}

double original_activation(DivergenceKind kind, double v) {
    return fd_original_activation(kind, jet_const(v)).v;
}

double reward_map(DivergenceKind kind, double v) {
    return fd_reward(kind, jet_const(v)).v;
}

double reparam_activation(DivergenceKind kind, double v) {
    return fd_reparam_activation(kind, jet_const(v)).v;
}

Jet2 fd_original_activation(DivergenceKind kind, Jet2 v) {
    switch (kind) {
        case DivergenceKind::TotalVariation: return 0.5 * jet_tanh(v);
        case DivergenceKind::KL: return v;
        case DivergenceKind::ReverseKL: return -jet_exp(v);
        case DivergenceKind::GAN: return jet_log_sigmoid(v);
    }
    throw std::logic_error("unreachable");
}

Jet2 fd_conjugate_of_original(DivergenceKind kind, Jet2 v) {
    switch (kind) {
        case DivergenceKind::TotalVariation:
            return 0.5 * jet_tanh(v);
        case DivergenceKind::KL:
            // f*(g_f(v)) = exp(v - 1); same overflow contract as conjugate().
            if (v.v > kKlConjugateMax) {
                std::ostringstream os;
                os << "conjugate(kl) of original activation: overflow at v=" << v.v;
                throw std::overflow_error(os.str());
            }
            return jet_exp(v - 1.0);
        case DivergenceKind::ReverseKL:
            return -1.0 - v;
        case DivergenceKind::GAN:
            return jet_softplus(v);
    }
    throw std::logic_error("unreachable");
}

Jet2 fd_reward(DivergenceKind kind, Jet2 v) {
    Jet2 s = jet_sigmoid(v);
    if (kind == DivergenceKind::TotalVariation) s = 0.5 * s;
    // Keep the reward strictly inside the open domain even where sigmoid
    // underflows (v < -745).
    if (s.v < DBL_MIN) s.v = DBL_MIN;
    return s;
}

Jet2 fd_reparam_activation(DivergenceKind kind, Jet2 v) {
    switch (kind) {
        case DivergenceKind::TotalVariation:
            return fd_reward(kind, v);
        case DivergenceKind::KL:
            return 1.0 + jet_log_sigmoid(v);
        case DivergenceKind::ReverseKL:
            return -jet_exp(-1.0 - jet_sigmoid(v));
        case DivergenceKind::GAN:
            return jet_log(-jet_expm1(-fd_reward(kind, v)));
    }
    throw std::logic_error("unreachable");
}

Jet2 fd_neg_sigmoid(Jet2 v) { return -jet_sigmoid(v); }

Jet2 fd_conjugate_of_neg_sigmoid(DivergenceKind kind, Jet2 v) {
    Jet2 s = jet_sigmoid(v);
    switch (kind) {
        case DivergenceKind::TotalVariation:
            // dom f* is [-1/2, 1/2]; -sigmoid(v) leaves it as soon as v > 0.
            if (s.v > 0.5) domain_fail("conjugate of swapped activation", kind, -s.v);
            return -s;
        case DivergenceKind::KL:
            return jet_exp(-s - 1.0);
        case DivergenceKind::ReverseKL:
            return -1.0 - jet_log_sigmoid(v);
        case DivergenceKind::GAN:
            return -jet_log(-jet_expm1(-s));
    }
    throw std::logic_error("unreachable");
}

}  // namespace fvim
