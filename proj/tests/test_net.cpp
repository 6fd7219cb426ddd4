#include <cmath>
#include <vector>

#include "doctest.h"
#include "fvim/errors.hpp"
#include "fvim/net.hpp"
#include "fvim/rng.hpp"

using namespace fvim;

namespace {

// Straight-line evaluation of a fixed 2-3-1 net with given parameters,
// independent of the library's layer loop.
double hand_forward_231(const std::vector<double>& p, double x0, double x1) {
    const double h0 = std::tanh(p[0] * x0 + p[1] * x1 + p[6]);
    const double h1 = std::tanh(p[2] * x0 + p[3] * x1 + p[7]);
    const double h2 = std::tanh(p[4] * x0 + p[5] * x1 + p[8]);
    return p[9] * h0 + p[10] * h1 + p[11] * h2 + p[12];
}

}  // namespace

TEST_SUITE_BEGIN("net");

TEST_CASE("parameter count bookkeeping") {
    NetSpec spec{4, {64, 64}, 2};
    CHECK(spec.param_count() == (4 + 1) * 64 + (64 + 1) * 64 + (64 + 1) * 2);
    NetSpec linear{1, {}, 1};
    CHECK(linear.param_count() == 2);
}

TEST_CASE("forward matches hand evaluation") {
    SUBCASE("zero params give zero output") {
        NetSpec spec{3, {5, 4}, 2};
        ParamVector params(spec.param_count(), 0.0);
        const std::vector<double> input{1.0, -2.0, 0.5};
        for (double y : net_forward(spec, params, input)) CHECK(y == 0.0);
    }
    SUBCASE("affine identity") {
        NetSpec spec{1, {}, 1};
        ParamVector params{1.0, 0.0};
        const std::vector<double> input{2.0};
        CHECK(net_forward(spec, params, input)[0] == doctest::Approx(2.0));
    }
    SUBCASE("seeded 2-3-1 net") {
        NetSpec spec{2, {3}, 1};
        Rng rng(123);
        ParamVector params = init_params(spec, rng);
        REQUIRE(params.size() == 13);
        const std::vector<double> input{0.7, -1.3};
        CHECK(net_forward(spec, params, input)[0] ==
              doctest::Approx(hand_forward_231(params, 0.7, -1.3)).epsilon(1e-14));
    }
    SUBCASE("dimension mismatch") {
        NetSpec spec{2, {3}, 1};
        ParamVector params(spec.param_count(), 0.1);
        CHECK_THROWS_AS(net_forward(spec, params, std::vector<double>{1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(net_forward(spec, ParamVector(3, 0.0), std::vector<double>{1.0, 2.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("backward: zero cotangent, linear layer rows") {
    NetSpec spec{2, {3}, 2};
    Rng rng(5);
    ParamVector params = init_params(spec, rng);
    const std::vector<double> input{0.3, -0.9};
    SUBCASE("zero cotangent gives zero gradients") {
        NetGradients g = net_gradients(spec, params, input, std::vector<double>{0.0, 0.0});
        for (double x : g.params) CHECK(x == 0.0);
        for (double x : g.input) CHECK(x == 0.0);
    }
    SUBCASE("single linear layer input grads are the weight row") {
        NetSpec lin{3, {}, 1};
        ParamVector p{0.5, -1.5, 2.0, 0.7};
        NetGradients g =
            net_gradients(lin, p, std::vector<double>{1.0, 1.0, 1.0}, std::vector<double>{1.0});
        CHECK(g.input[0] == doctest::Approx(0.5));
        CHECK(g.input[1] == doctest::Approx(-1.5));
        CHECK(g.input[2] == doctest::Approx(2.0));
    }
}

TEST_CASE("finite differences validate the reverse pass") {
    Rng rng(2024);
    SUBCASE("quadratic loss on a linear net is near exact") {
        NetSpec spec{3, {}, 1};
        ParamVector params = init_params(spec, rng);
        ScalarLoss loss{
            [](std::span<const double> y) { return y[0] * y[0]; },
            [](std::span<const double> y) { return std::vector<double>{2.0 * y[0]}; }};
        const std::vector<double> input{0.4, -0.2, 1.1};
        CHECK(finite_diff_check(spec, params, input, loss) < 1e-9);
    }
    SUBCASE("tanh net with sigmoid-composed loss") {
        NetSpec spec{4, {8, 6}, 1};
        ParamVector params = init_params(spec, rng);
        ScalarLoss loss{
            [](std::span<const double> y) { return 1.0 / (1.0 + std::exp(-y[0])); },
            [](std::span<const double> y) {
                const double s = 1.0 / (1.0 + std::exp(-y[0]));
                return std::vector<double>{s * (1.0 - s)};
            }};
        std::vector<double> input;
        for (int i = 0; i < 4; ++i) input.push_back(rng.uniform(-1.0, 1.0));
        CHECK(finite_diff_check(spec, params, input, loss) < 1e-4);
    }
    SUBCASE("a corrupted gradient is detected") {
        NetSpec spec{2, {4}, 1};
        ParamVector params = init_params(spec, rng);
        const std::vector<double> input{0.8, -0.3};
        NetTrace trace = net_forward_trace(spec, params, input);
        NetGradients analytic =
            net_backward(spec, params, trace, std::vector<double>{1.0});
        // Double one entry; the check must flag it.
        std::size_t worst_idx = 0;
        for (std::size_t i = 0; i < analytic.params.size(); ++i)
            if (std::abs(analytic.params[i]) > std::abs(analytic.params[worst_idx])) worst_idx = i;
        analytic.params[worst_idx] *= 2.0;
        auto f = [&](std::span<const double> p) { return net_forward(spec, p, input)[0]; };
        CHECK(finite_diff_check(params, f, analytic.params) > 0.3);
    }
}

TEST_CASE("input gradients match finite differences") {
    Rng rng(77);
    NetSpec spec{3, {6, 5}, 2};
    ParamVector params = init_params(spec, rng);
    std::vector<double> input{0.2, -0.7, 0.9};
    const std::vector<double> cot{0.3, -1.2};
    NetGradients g = net_gradients(spec, params, input, cot);
    auto f = [&](std::span<const double> x) {
        std::vector<double> y = net_forward(spec, params, x);
        return cot[0] * y[0] + cot[1] * y[1];
    };
    CHECK(finite_diff_check(input, f, g.input) < 1e-6);
}

TEST_CASE("dual sweep computes exact Hessian-vector products") {
    Rng rng(31337);
    for (int rep = 0; rep < 5; ++rep) {
        NetSpec spec{3, {5, 4}, 1};
        ParamVector params = init_params(spec, rng);
        std::vector<double> input{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};

        // Scalar map phi(y) = sin(y): phi' = cos, phi'' = -sin.
        auto grad_of = [&](std::span<const double> p) {
            NetTrace t = net_forward_trace(spec, p, input);
            const double cot[1] = {std::cos(t.output[0])};
            return net_backward(spec, p, t, cot);
        };
        NetGradients base = grad_of(params);

        std::vector<double> direction(params.size());
        for (double& d : direction) d = rng.uniform(-1.0, 1.0);
        std::vector<double> zero_in(input.size(), 0.0);

        DualTrace dual = net_forward_dual(spec, params, direction, input, zero_in);
        const double y = dual.primal.output[0], ydot = dual.output_dot[0];
        const double cot[1] = {std::cos(y)};
        const double cot_dot[1] = {-std::sin(y) * ydot};
        DualNetGradients hvp = net_backward_dual(spec, params, direction, dual, cot, cot_dot);

        // Compare against central differences of the gradient along direction.
        const double h = 1e-6;
        ParamVector up(params), down(params);
        for (std::size_t i = 0; i < params.size(); ++i) {
            up[i] += h * direction[i];
            down[i] -= h * direction[i];
        }
        NetGradients gu = grad_of(up), gd = grad_of(down);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double numeric = (gu.params[i] - gd.params[i]) / (2.0 * h);
            CHECK(hvp.params_dot[i] == doctest::Approx(numeric).epsilon(5e-4).scale(1.0));
        }
        // Dual of the primal part must equal the plain gradient.
        for (std::size_t i = 0; i < params.size(); ++i)
            CHECK(hvp.primal.params[i] == doctest::Approx(base.params[i]).epsilon(1e-12));
    }
}

TEST_CASE("dual sweep with an input-side direction gives mixed second derivatives") {
    Rng rng(4242);
    NetSpec spec{2, {4}, 1};
    ParamVector params = init_params(spec, rng);
    std::vector<double> input{0.4, -0.6};
    std::vector<double> dir_in{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<double> zero_params(params.size(), 0.0);

    DualTrace dual = net_forward_dual(spec, params, zero_params, input, dir_in);
    const double cot[1] = {1.0};
    const double cot_dot[1] = {0.0};
    DualNetGradients mixed = net_backward_dual(spec, params, zero_params, dual, cot, cot_dot);

    const double h = 1e-6;
    std::vector<double> up{input[0] + h * dir_in[0], input[1] + h * dir_in[1]};
    std::vector<double> down{input[0] - h * dir_in[0], input[1] - h * dir_in[1]};
    NetGradients gu = net_gradients(spec, params, up, std::vector<double>{1.0});
    NetGradients gd = net_gradients(spec, params, down, std::vector<double>{1.0});
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double numeric = (gu.params[i] - gd.params[i]) / (2.0 * h);
        CHECK(mixed.params_dot[i] == doctest::Approx(numeric).epsilon(5e-4).scale(1.0));
    }
}

TEST_CASE("adam") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        ParamVector params{1.0, -2.0};
        AdamState state = make_adam(2, 1e-3);
        adam_step(state, params, std::vector<double>{0.0, 0.0});
        CHECK(state.step_count == 1);
        CHECK(params[0] == doctest::Approx(1.0));
        CHECK(params[1] == doctest::Approx(-2.0));
    }
    SUBCASE("first step matches the hand-computed update") {
        // m = (1-b1) g, v = (1-b2) g^2; with bias correction the step is
        // -lr * g / (|g| + eps * sqrt(1-b2)).
        const double g = 0.37, lr = 0.01;
        ParamVector params{0.0};
        AdamState state = make_adam(1, lr);
        adam_step(state, params, std::vector<double>{g});
        const double mhat = g;
        const double vhat = g * g;
        const double expected = -lr * mhat / (std::sqrt(vhat) + state.epsilon);
        CHECK(params[0] == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("constant gradient moves monotonically against its sign") {
        ParamVector params{0.5};
        AdamState state = make_adam(1, 1e-2);
        double prev = params[0];
        for (int i = 0; i < 5; ++i) {
            adam_step(state, params, std::vector<double>{2.0});
            CHECK(params[0] < prev);
            prev = params[0];
        }
    }
    SUBCASE("non-finite gradient raises") {
        ParamVector params{0.0};
        AdamState state = make_adam(1, 1e-3);
        CHECK_THROWS_AS(adam_step(state, params, std::vector<double>{std::nan("")}),
                        NonFiniteError);
        CHECK_THROWS_AS(adam_step(state, params, std::vector<double>{INFINITY}), NonFiniteError);
    }
    SUBCASE("overflowing second moment raises after the update") {
        ParamVector params{0.0};
        AdamState state = make_adam(1, 1e-3);
        CHECK_THROWS_AS(adam_step(state, params, std::vector<double>{1e200}), NonFiniteError);
    }
}

TEST_CASE("initialization is deterministic and finite") {
    NetSpec spec{6, {16, 16}, 3};
    Rng a(42), b(42);
    ParamVector pa = init_params(spec, a), pb = init_params(spec, b);
    CHECK(pa == pb);
    for (double x : pa) {
        CHECK(std::isfinite(x));
        CHECK(std::abs(x) <= 1.0);  // fan_in >= 1
    }
    // Forward/gradient determinism on the same platform.
    std::vector<double> input{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    auto y1 = net_forward(spec, pa, input);
    auto y2 = net_forward(spec, pb, input);
    CHECK(y1 == y2);
}

TEST_SUITE_END();
