#include "fvim/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fvim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDt = 0.05;

// Pendulum constants: gravity, mass, length, angular speed limit.
constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kMaxAngVel = 8.0;

enum class EnvFamily { PointMass2D, PendulumSwingup };

EnvFamily family_of(const EnvSpec& spec) {
    if (spec.env_id == "pointmass2d-v0") return EnvFamily::PointMass2D;
    if (spec.env_id == "pendulum-swingup-v0") return EnvFamily::PendulumSwingup;
    throw std::invalid_argument("unknown env_id: " + spec.env_id);
}

double clip(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

double wrap_angle(double theta) {
    double w = std::fmod(theta + kPi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w - kPi;
}

}  // namespace

EnvSpec make_env_spec(const std::string& env_id) {
    if (env_id == "pointmass2d-v0") return {env_id, 4, 2, 100, 1.0};
    if (env_id == "pendulum-swingup-v0") return {env_id, 3, 1, 200, 2.0};
    throw std::invalid_argument("unknown env_id: " + env_id);
}

EnvState env_reset(const EnvSpec& spec, Rng& rng) {
    EnvState state;
    switch (family_of(spec)) {
        case EnvFamily::PointMass2D:
            state.internal = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0, 0.0};
            break;
        case EnvFamily::PendulumSwingup:
            state.internal = {rng.uniform(-kPi, kPi), rng.uniform(-1.0, 1.0)};
            break;
    }
    return state;
}

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return env_reset(spec, rng);
}

std::vector<double> env_observe(const EnvSpec& spec, const EnvState& state) {
    switch (family_of(spec)) {
        case EnvFamily::PointMass2D:
            return state.internal;
        case EnvFamily::PendulumSwingup:
            return {std::cos(state.internal[0]), std::sin(state.internal[0]), state.internal[1]};
    }
    throw std::logic_error("unreachable");
}

StepResult env_step(const EnvSpec& spec, const EnvState& state, std::span<const double> action) {
    if (action.size() != static_cast<std::size_t>(spec.act_dim)) {
        std::ostringstream os;
        os << "action length " << action.size() << " does not match act_dim " << spec.act_dim;
        throw std::invalid_argument(os.str());
    }
    StepResult result;
    result.state.t = state.t + 1;
    result.done = result.state.t >= spec.horizon;

    switch (family_of(spec)) {
        case EnvFamily::PointMass2D: {
            const double ax = clip(action[0], -spec.action_bound, spec.action_bound);
            const double ay = clip(action[1], -spec.action_bound, spec.action_bound);
            double vx = clip(state.internal[2] + ax * kDt, -1.0, 1.0);
            double vy = clip(state.internal[3] + ay * kDt, -1.0, 1.0);
            // Arena walls at +-2 keep observations bounded.
            const double px = clip(state.internal[0] + vx * kDt, -2.0, 2.0);
            const double py = clip(state.internal[1] + vy * kDt, -2.0, 2.0);
            result.state.internal = {px, py, vx, vy};
            result.reward = -std::sqrt(px * px + py * py) - 0.01 * (ax * ax + ay * ay);
            break;
        }
        case EnvFamily::PendulumSwingup: {
            const double u = clip(action[0], -spec.action_bound, spec.action_bound);
            const double theta = state.internal[0];
            const double theta_dot = state.internal[1];
            // Cost of the state we act from, torque included.
            result.reward = -(theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u * u);
            const double acc = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta) +
                               3.0 / (kMass * kLength * kLength) * u;
            const double new_dot = clip(theta_dot + acc * kDt, -kMaxAngVel, kMaxAngVel);
            const double new_theta = wrap_angle(theta + new_dot * kDt);
            result.state.internal = {new_theta, new_dot};
            break;
        }
    }
    result.obs = env_observe(spec, result.state);
    return result;
}

}  // namespace fvim
