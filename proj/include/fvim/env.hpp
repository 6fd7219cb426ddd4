#pragma once

#include <span>
#include <string>
#include <vector>

#include "fvim/rng.hpp"

namespace fvim {

struct EnvSpec {
    std::string env_id;
    int obs_dim = 0;
    int act_dim = 0;
    int horizon = 0;
    double action_bound = 0.0;
};

// "pointmass2d-v0" or "pendulum-swingup-v0".
EnvSpec make_env_spec(const std::string& env_id);

// Environment state is internal coordinates plus the step counter; both
// environments run to a fixed horizon with no early termination.
struct EnvState {
    std::vector<double> internal;
    int t = 0;
};

struct StepResult {
    EnvState state;
    std::vector<double> obs;
    double reward = 0.0;
    bool done = false;
};

EnvState env_reset(const EnvSpec& spec, Rng& rng);
EnvState env_reset(const EnvSpec& spec, std::uint64_t seed);
std::vector<double> env_observe(const EnvSpec& spec, const EnvState& state);
StepResult env_step(const EnvSpec& spec, const EnvState& state, std::span<const double> action);

// Stepping view with the reward withheld. Imitation trainers interact with
// the environment exclusively through this type, so the true reward cannot
// leak into adversarial training.
class ObservationEnv {
public:
    explicit ObservationEnv(EnvSpec spec) : spec_(std::move(spec)) {}

    struct Step {
        EnvState state;
        std::vector<double> obs;
        bool done = false;
    };

    const EnvSpec& spec() const { return spec_; }
    EnvState reset(Rng& rng) const { return env_reset(spec_, rng); }
    std::vector<double> observe(const EnvState& s) const { return env_observe(spec_, s); }
    Step step(const EnvState& s, std::span<const double> action) const {
        StepResult r = env_step(spec_, s, action);
        return {std::move(r.state), std::move(r.obs), r.done};
    }

private:
    EnvSpec spec_;
};

}  // namespace fvim
