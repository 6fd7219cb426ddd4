#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fvim/rng.hpp"

namespace fvim {

// Feed-forward network shape: affine layers with tanh between them and a
// linear output. Parameters live in one flat vector, per layer weights
// (row-major, out x in) then biases.
struct NetSpec {
    int input_dim = 1;
    std::vector<int> hidden_sizes;
    int output_dim = 1;

    std::size_t layer_count() const { return hidden_sizes.size() + 1; }
    int layer_in(std::size_t l) const { return l == 0 ? input_dim : hidden_sizes[l - 1]; }
    int layer_out(std::size_t l) const {
        return l == hidden_sizes.size() ? output_dim : hidden_sizes[l];
    }
    std::size_t param_count() const;
};

using ParamVector = std::vector<double>;

// Zero-mean uniform init scaled by 1/sqrt(fan_in), weights and biases alike.
ParamVector init_params(const NetSpec& spec, Rng& rng);

// Activations recorded by a forward pass, enough to run the reverse pass.
struct NetTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> hidden;  // post-tanh, one per hidden layer
    std::vector<double> output;
};

NetTrace net_forward_trace(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> input);
std::vector<double> net_forward(const NetSpec& spec, std::span<const double> params,
                                std::span<const double> input);

struct NetGradients {
    std::vector<double> params;
    std::vector<double> input;
};

// Vector-Jacobian product: gradients of <cotangent, output> with respect to
// parameters and input.
NetGradients net_backward(const NetSpec& spec, std::span<const double> params,
                          const NetTrace& trace, std::span<const double> cotangent);
NetGradients net_gradients(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> input, std::span<const double> cotangent);

// Accumulating form for batch loops: adds scale * VJP into param_accum.
void net_backward_accum(const NetSpec& spec, std::span<const double> params,
                        const NetTrace& trace, std::span<const double> cotangent,
                        double scale, std::span<double> param_accum);

// Forward-over-reverse sweep. Every intermediate carries a directional
// derivative along (params_dot, input_dot); the dual parts of the returned
// gradients are exact Hessian-vector products, which is what the
// discriminator gradient penalty differentiates through.
struct DualTrace {
    NetTrace primal;
    std::vector<double> input_dot;
    std::vector<std::vector<double>> hidden_dot;
    std::vector<double> output_dot;
};

DualTrace net_forward_dual(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> params_dot, std::span<const double> input,
                           std::span<const double> input_dot);

struct DualNetGradients {
    NetGradients primal;
    std::vector<double> params_dot;
    std::vector<double> input_dot;
};

DualNetGradients net_backward_dual(const NetSpec& spec, std::span<const double> params,
                                   std::span<const double> params_dot, const DualTrace& trace,
                                   std::span<const double> cotangent,
                                   std::span<const double> cotangent_dot);

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam(std::size_t n_params, double learning_rate);

// Bias-corrected Adam step, in place. Throws NonFiniteError on non-finite
// gradients, and on non-finite moments or parameters after the update (the
// latter is how exploding-reward runs surface as stability events).
void adam_step(AdamState& state, ParamVector& params, std::span<const double> grads);

// Max relative error between an analytic gradient and central finite
// differences of f, h = 1e-5.
double finite_diff_check(std::span<const double> x,
                         const std::function<double(std::span<const double>)>& f,
                         std::span<const double> analytic_grad, double h = 1e-5);

// Same check for a scalar loss applied to a network's output.
struct ScalarLoss {
    std::function<double(std::span<const double>)> value;                 // y -> loss
    std::function<std::vector<double>(std::span<const double>)> gradient; // y -> dloss/dy
};

double finite_diff_check(const NetSpec& spec, const ParamVector& params,
                         std::span<const double> input, const ScalarLoss& loss);

}  // namespace fvim
