#include "fvim/net.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "fvim/errors.hpp"

namespace fvim {

namespace {

void check_dims(const NetSpec& spec, std::size_t n_params, std::size_t n_input) {
    if (n_params != spec.param_count()) {
        std::ostringstream os;
        os << "parameter vector length " << n_params << " does not match spec ("
           << spec.param_count() << ")";
        throw std::invalid_argument(os.str());
    }
    if (n_input != static_cast<std::size_t>(spec.input_dim)) {
        std::ostringstream os;
        os << "input length " << n_input << " does not match input_dim " << spec.input_dim;
        throw std::invalid_argument(os.str());
    }
}

// Offset of layer l's weights; biases follow the weights.
std::size_t layer_offset(const NetSpec& spec, std::size_t l) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k)
        off += static_cast<std::size_t>(spec.layer_in(k) + 1) * spec.layer_out(k);
    return off;
}

}  // namespace

std::size_t NetSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l)
        n += static_cast<std::size_t>(layer_in(l) + 1) * layer_out(l);
    return n;
}

ParamVector init_params(const NetSpec& spec, Rng& rng) {
    ParamVector params(spec.param_count());
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_in(l)));
        const std::size_t n = static_cast<std::size_t>(spec.layer_in(l) + 1) * spec.layer_out(l);
        for (std::size_t i = 0; i < n; ++i) params[off + i] = rng.uniform(-bound, bound);
        off += n;
    }
    return params;
}

NetTrace net_forward_trace(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> input) {
    check_dims(spec, params.size(), input.size());
    NetTrace trace;
    trace.input.assign(input.begin(), input.end());
    const double* cur = trace.input.data();
    int cur_dim = spec.input_dim;
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const int in = spec.layer_in(l), out = spec.layer_out(l);
        const double* W = params.data() + off;
        const double* b = W + static_cast<std::size_t>(in) * out;
        std::vector<double> next(out);
        for (int r = 0; r < out; ++r) {
            const double* row = W + static_cast<std::size_t>(r) * in;
            double acc = b[r];
            for (int c = 0; c < in; ++c) acc += row[c] * cur[c];
            next[r] = acc;
        }
        if (l + 1 < spec.layer_count()) {
            for (int r = 0; r < out; ++r) next[r] = std::tanh(next[r]);
            trace.hidden.push_back(std::move(next));
            cur = trace.hidden.back().data();
        } else {
            trace.output = std::move(next);
            cur = trace.output.data();
        }
        cur_dim = out;
        off += static_cast<std::size_t>(in + 1) * out;
    }
    (void)cur_dim;
    return trace;
}

std::vector<double> net_forward(const NetSpec& spec, std::span<const double> params,
                                std::span<const double> input) {
    return net_forward_trace(spec, params, input).output;
}

namespace {

// Shared reverse sweep; param_accum receives scale * dL/dparams, and the
// returned vector is dL/dinput (unscaled).
std::vector<double> backward_impl(const NetSpec& spec, std::span<const double> params,
                                  const NetTrace& trace, std::span<const double> cotangent,
                                  double scale, std::span<double> param_accum) {
    if (cotangent.size() != static_cast<std::size_t>(spec.output_dim))
        throw std::invalid_argument("cotangent length does not match output_dim");
    std::vector<double> delta(cotangent.begin(), cotangent.end());
    std::vector<double> input_grad;
    for (std::size_t li = spec.layer_count(); li-- > 0;) {
        const int in = spec.layer_in(li), out = spec.layer_out(li);
        const std::size_t off = layer_offset(spec, li);
        const double* W = params.data() + off;
        const double* below = li == 0 ? trace.input.data() : trace.hidden[li - 1].data();
        double* gW = param_accum.data() + off;
        double* gb = gW + static_cast<std::size_t>(in) * out;
        for (int r = 0; r < out; ++r) {
            const double d = delta[r];
            gb[r] += scale * d;
            double* grow = gW + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) grow[c] += scale * d * below[c];
        }
        std::vector<double> prev(in, 0.0);
        for (int r = 0; r < out; ++r) {
            const double d = delta[r];
            const double* row = W + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) prev[c] += d * row[c];
        }
        if (li == 0) {
            input_grad = std::move(prev);
        } else {
            const std::vector<double>& h = trace.hidden[li - 1];
            for (int c = 0; c < in; ++c) prev[c] *= 1.0 - h[c] * h[c];
            delta = std::move(prev);
        }
    }
    return input_grad;
}

}  // namespace

NetGradients net_backward(const NetSpec& spec, std::span<const double> params,
                          const NetTrace& trace, std::span<const double> cotangent) {
    NetGradients g;
    g.params.assign(spec.param_count(), 0.0);
    g.input = backward_impl(spec, params, trace, cotangent, 1.0, g.params);
    return g;
}

NetGradients net_gradients(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> input, std::span<const double> cotangent) {
    NetTrace trace = net_forward_trace(spec, params, input);
    return net_backward(spec, params, trace, cotangent);
}

void net_backward_accum(const NetSpec& spec, std::span<const double> params,
                        const NetTrace& trace, std::span<const double> cotangent,
                        double scale, std::span<double> param_accum) {
    backward_impl(spec, params, trace, cotangent, scale, param_accum);
}

DualTrace net_forward_dual(const NetSpec& spec, std::span<const double> params,
                           std::span<const double> params_dot, std::span<const double> input,
                           std::span<const double> input_dot) {
    check_dims(spec, params.size(), input.size());
    if (params_dot.size() != params.size() || input_dot.size() != input.size())
        throw std::invalid_argument("dual direction lengths do not match");
    DualTrace trace;
    trace.primal.input.assign(input.begin(), input.end());
    trace.input_dot.assign(input_dot.begin(), input_dot.end());
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> cur_dot(input_dot.begin(), input_dot.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const int in = spec.layer_in(l), out = spec.layer_out(l);
        const double* W = params.data() + off;
        const double* Wd = params_dot.data() + off;
        const double* b = W + static_cast<std::size_t>(in) * out;
        const double* bd = Wd + static_cast<std::size_t>(in) * out;
        std::vector<double> next(out), next_dot(out);
        for (int r = 0; r < out; ++r) {
            const double* row = W + static_cast<std::size_t>(r) * in;
            const double* row_d = Wd + static_cast<std::size_t>(r) * in;
            double acc = b[r], acc_dot = bd[r];
            for (int c = 0; c < in; ++c) {
                acc += row[c] * cur[c];
                acc_dot += row_d[c] * cur[c] + row[c] * cur_dot[c];
            }
            next[r] = acc;
            next_dot[r] = acc_dot;
        }
        if (l + 1 < spec.layer_count()) {
            for (int r = 0; r < out; ++r) {
                const double t = std::tanh(next[r]);
                next[r] = t;
                next_dot[r] *= 1.0 - t * t;
            }
            trace.primal.hidden.push_back(next);
            trace.hidden_dot.push_back(next_dot);
        } else {
            trace.primal.output = next;
            trace.output_dot = next_dot;
        }
        cur = std::move(next);
        cur_dot = std::move(next_dot);
        off += static_cast<std::size_t>(in + 1) * out;
    }
    return trace;
}

DualNetGradients net_backward_dual(const NetSpec& spec, std::span<const double> params,
                                   std::span<const double> params_dot, const DualTrace& trace,
                                   std::span<const double> cotangent,
                                   std::span<const double> cotangent_dot) {
    if (cotangent.size() != static_cast<std::size_t>(spec.output_dim) ||
        cotangent_dot.size() != cotangent.size())
        throw std::invalid_argument("cotangent length does not match output_dim");
    DualNetGradients g;
    g.primal.params.assign(spec.param_count(), 0.0);
    g.params_dot.assign(spec.param_count(), 0.0);

    std::vector<double> delta(cotangent.begin(), cotangent.end());
    std::vector<double> delta_dot(cotangent_dot.begin(), cotangent_dot.end());
    for (std::size_t li = spec.layer_count(); li-- > 0;) {
        const int in = spec.layer_in(li), out = spec.layer_out(li);
        const std::size_t off = layer_offset(spec, li);
        const double* W = params.data() + off;
        const double* Wd = params_dot.data() + off;
        const double* below = li == 0 ? trace.primal.input.data() : trace.primal.hidden[li - 1].data();
        const double* below_dot = li == 0 ? trace.input_dot.data() : trace.hidden_dot[li - 1].data();

        double* gW = g.primal.params.data() + off;
        double* gWd = g.params_dot.data() + off;
        double* gb = gW + static_cast<std::size_t>(in) * out;
        double* gbd = gWd + static_cast<std::size_t>(in) * out;

        for (int r = 0; r < out; ++r) {
            const double d = delta[r], dd = delta_dot[r];
            gb[r] += d;
            gbd[r] += dd;
            double* grow = gW + static_cast<std::size_t>(r) * in;
            double* growd = gWd + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) {
                grow[c] += d * below[c];
                growd[c] += dd * below[c] + d * below_dot[c];
            }
        }
        std::vector<double> prev(in, 0.0), prev_dot(in, 0.0);
        for (int r = 0; r < out; ++r) {
            const double d = delta[r], dd = delta_dot[r];
            const double* row = W + static_cast<std::size_t>(r) * in;
            const double* row_d = Wd + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) {
                prev[c] += d * row[c];
                prev_dot[c] += dd * row[c] + d * row_d[c];
            }
        }
        if (li == 0) {
            g.primal.input = std::move(prev);
            g.input_dot = std::move(prev_dot);
        } else {
            const std::vector<double>& h = trace.primal.hidden[li - 1];
            const std::vector<double>& hd = trace.hidden_dot[li - 1];
            for (int c = 0; c < in; ++c) {
                const double sech2 = 1.0 - h[c] * h[c];
                // d/deps [prev * (1 - h^2)] = prev_dot*(1-h^2) - 2 h h_dot prev
                prev_dot[c] = prev_dot[c] * sech2 - 2.0 * h[c] * hd[c] * prev[c];
                prev[c] *= sech2;
            }
            delta = std::move(prev);
            delta_dot = std::move(prev_dot);
        }
    }
    return g;
}

AdamState make_adam(std::size_t n_params, double learning_rate) {
    AdamState s;
    s.first_moment.assign(n_params, 0.0);
    s.second_moment.assign(n_params, 0.0);
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(AdamState& state, ParamVector& params, std::span<const double> grads) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size())
        throw std::invalid_argument("adam_step: length mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw NonFiniteError("adam_step: non-finite gradient");
    state.step_count += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    bool finite = true;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = b1 * m + (1.0 - b1) * grads[i];
        v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
        params[i] -= state.learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
        finite = finite && std::isfinite(v) && std::isfinite(params[i]);
    }
    if (!finite) throw NonFiniteError("adam_step: non-finite optimizer state after update");
}

double finite_diff_check(std::span<const double> x,
                         const std::function<double(std::span<const double>)>& f,
                         std::span<const double> analytic_grad, double h) {
    if (analytic_grad.size() != x.size())
        throw std::invalid_argument("finite_diff_check: gradient length mismatch");
    std::vector<double> probe(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double keep = probe[i];
        probe[i] = keep + h;
        const double up = f(probe);
        probe[i] = keep - h;
        const double down = f(probe);
        probe[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = analytic_grad[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
    return worst;
}

double finite_diff_check(const NetSpec& spec, const ParamVector& params,
                         std::span<const double> input, const ScalarLoss& loss) {
    NetTrace trace = net_forward_trace(spec, params, input);
    std::vector<double> cot = loss.gradient(trace.output);
    NetGradients analytic = net_backward(spec, params, trace, cot);
    auto f = [&](std::span<const double> p) {
        return loss.value(net_forward(spec, p, input));
    };
    return finite_diff_check(params, f, analytic.params);
}

}  // namespace fvim
