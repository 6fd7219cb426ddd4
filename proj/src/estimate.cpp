#include "fvim/estimate.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace fvim {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kRatioFloor = 1e-300;
constexpr double kEstimatorGradClip = 100.0;
constexpr int kSmoothWindow = 100;
}  // namespace

SampleSource SampleSource::gaussian(double mean, double std_dev) {
    if (!(std_dev > 0.0)) throw std::invalid_argument("SampleSource: std must be > 0");
    return {{1.0}, {mean}, {std_dev}};
}

SampleSource SampleSource::mixture(std::vector<double> weights, std::vector<double> means,
                                   std::vector<double> stds) {
    if (weights.empty() || weights.size() != means.size() || weights.size() != stds.size())
        throw std::invalid_argument("SampleSource: component lists must match and be non-empty");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("SampleSource: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("SampleSource: weights must sum to 1");
    for (double s : stds)
        if (!(s > 0.0)) throw std::invalid_argument("SampleSource: std must be > 0");
    return {std::move(weights), std::move(means), std::move(stds)};
}

double SampleSource::density(double x) const {
    double d = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double z = (x - means[i]) / stds[i];
        d += weights[i] * kInvSqrt2Pi / stds[i] * std::exp(-0.5 * z * z);
    }
    return d;
}

double SampleSource::cdf(double x) const {
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        c += weights[i] * 0.5 * std::erfc(-(x - means[i]) / (stds[i] * std::sqrt(2.0)));
    return c;
}

double SampleSource::sample(Rng& rng) const {
    std::size_t component = 0;
    if (weights.size() > 1) {
        double u = rng.uniform01();
        for (; component + 1 < weights.size(); ++component) {
            if (u < weights[component]) break;
            u -= weights[component];
        }
    }
    return means[component] + stds[component] * rng.normal();
}

double numeric_fdiv(const SampleSource& p, const SampleSource& q, DivergenceKind kind,
                    const QuadratureGrid& grid) {
    if (grid.n < 10000) throw std::invalid_argument("numeric_fdiv: need at least 1e4 grid points");
    const double p_tail = p.cdf(grid.lo) + (1.0 - p.cdf(grid.hi));
    const double q_tail = q.cdf(grid.lo) + (1.0 - q.cdf(grid.hi));
    if (p_tail > 1e-8 || q_tail > 1e-8) {
        std::ostringstream os;
        os << "numeric_fdiv: grid [" << grid.lo << ", " << grid.hi
           << "] misses tail mass p=" << p_tail << " q=" << q_tail;
        throw std::invalid_argument(os.str());
    }
    const double h = (grid.hi - grid.lo) / static_cast<double>(grid.n - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.lo + h * static_cast<double>(i);
        const double qx = q.density(x);
        const double ratio = std::max(p.density(x) / std::max(qx, kRatioFloor), kRatioFloor);
        const double integrand = qx * generator(kind, ratio);
        total += (i == 0 || i + 1 == grid.n) ? 0.5 * integrand : integrand;
    }
    return total * h;
}

double closed_form_kl(const SampleSource& p, const SampleSource& q) {
    if (p.weights.size() != 1 || q.weights.size() != 1)
        throw std::invalid_argument("closed_form_kl: both sources must be single Gaussians");
    const double mp = p.means[0], sp = p.stds[0];
    const double mq = q.means[0], sq = q.stds[0];
    return std::log(sq / sp) + (sp * sp + (mp - mq) * (mp - mq)) / (2.0 * sq * sq) - 0.5;
}

EstimateResult variational_estimate(const SampleSource& p, const SampleSource& q,
                                    DivergenceKind kind, const EstimatorConfig& config) {
    if (config.steps < 1 || config.batch_size < 1)
        throw std::invalid_argument("variational_estimate: budgets must be positive");
    Rng rng(mix_seed(config.seed, 0x45535449));  // "ESTI"

    NetSpec spec{1, config.hidden, 1};
    ParamVector params = init_params(spec, rng);
    AdamState opt = make_adam(params.size(), config.lr);

    EstimateResult result;
    std::deque<double> window;
    double window_sum = 0.0;
    const int tail_start = config.steps - std::max(1, config.steps / 10);
    double tail_sum = 0.0;
    int tail_count = 0;

    std::vector<double> grad(params.size());
    const double w = 1.0 / static_cast<double>(config.batch_size);
    for (int step = 0; step < config.steps; ++step) {
        double objective = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        bool overflowed = false;
        try {
            for (int b = 0; b < config.batch_size; ++b) {
                const double xp[1] = {p.sample(rng)};
                NetTrace trace = net_forward_trace(spec, params, xp);
                Jet2 term = fd_original_activation(kind, jet_var(trace.output[0]));
                objective += w * term.v;
                const double cot[1] = {term.d1};
                net_backward_accum(spec, params, trace, cot, w, grad);
            }
            for (int b = 0; b < config.batch_size; ++b) {
                const double xq[1] = {q.sample(rng)};
                NetTrace trace = net_forward_trace(spec, params, xq);
                Jet2 term = fd_conjugate_of_original(kind, jet_var(trace.output[0]));
                objective -= w * term.v;
                const double cot[1] = {term.d1};
                net_backward_accum(spec, params, trace, cot, -w, grad);
            }
        } catch (const std::overflow_error& e) {
            result.events.push_back({step, e.what()});
            overflowed = true;
        }
        if (!overflowed) {
            // Ascend, with a local norm clip so KL runs finish.
            double norm_sq = 0.0;
            for (double g : grad) norm_sq += g * g;
            const double norm = std::sqrt(norm_sq);
            double scale = -1.0;
            if (norm > kEstimatorGradClip) scale *= kEstimatorGradClip / norm;
            for (double& g : grad) g *= scale;
            try {
                adam_step(opt, params, grad);
            } catch (const NonFiniteError& e) {
                result.events.push_back({step, e.what()});
                overflowed = true;
            }
        }
        if (!overflowed) {
            window.push_back(objective);
            window_sum += objective;
            if (window.size() > kSmoothWindow) {
                window_sum -= window.front();
                window.pop_front();
            }
            result.curve.push_back(
                {step, objective, window_sum / static_cast<double>(window.size())});
            if (step >= tail_start) {
                tail_sum += objective;
                tail_count += 1;
            }
        }
    }
    result.estimate = tail_count > 0 ? tail_sum / static_cast<double>(tail_count) : 0.0;
    return result;
}

}  // namespace fvim
