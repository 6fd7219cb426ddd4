#pragma once

#include <cstdint>
#include <vector>

#include "fvim/errors.hpp"
#include "fvim/fdiv.hpp"
#include "fvim/net.hpp"

namespace fvim {

// A sampleable 1-d distribution with a closed-form density: a Gaussian or a
// finite Gaussian mixture.
struct SampleSource {
    std::vector<double> weights;  // positive, sum to 1
    std::vector<double> means;
    std::vector<double> stds;  // > 0

    static SampleSource gaussian(double mean, double std_dev);
    static SampleSource mixture(std::vector<double> weights, std::vector<double> means,
                                std::vector<double> stds);

    double density(double x) const;
    double cdf(double x) const;
    double sample(Rng& rng) const;
};

struct QuadratureGrid {
    double lo = -10.0;
    double hi = 10.0;
    std::size_t n = 100000;
};

// Trapezoidal quadrature of q(x) f(p(x)/q(x)). Requires the grid to cover all
// but 1e-8 of both tails and at least 1e4 points.
double numeric_fdiv(const SampleSource& p, const SampleSource& q, DivergenceKind kind,
                    const QuadratureGrid& grid = {});

double closed_form_kl(const SampleSource& p, const SampleSource& q);

struct EstimatorConfig {
    std::vector<int> hidden = {64, 64};  // variational net, 1 -> 1
    int steps = 2000;
    int batch_size = 512;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

struct EstimatePoint {
    int step = 0;
    double objective = 0.0;  // this step's minibatch objective
    double smoothed = 0.0;   // trailing mean over the last 100 steps
};

struct EstimateResult {
    double estimate = 0.0;  // mean objective over the final 10% of steps
    std::vector<EstimatePoint> curve;
    std::vector<StabilityEvent> events;
};

// Variational bound maximization with the original f-GAN activations and
// fresh batches per step. Overflow steps are recorded and skipped; gradient
// norms are clipped at 100 inside this routine only.
EstimateResult variational_estimate(const SampleSource& p, const SampleSource& q,
                                    DivergenceKind kind, const EstimatorConfig& config);

}  // namespace fvim
