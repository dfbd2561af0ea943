#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bflsim/latency.hpp"
#include "bflsim/params.hpp"
#include "bflsim/vec.hpp"

namespace bflsim::env {

struct EnvConfig {
    double tau = 0.0;          // latency upper bound; <= 0 means 3s * N
    double gamma = 0.9;        // discount
    std::size_t episode_len = 10;
    double loss_eps = 0.5;     // per-episode quality constraint, reported only
};

// Flattened state: [data(N), occupancy(N*G), bandwidth(N*G), cpu(N), hash(N)].
struct SystemState {
    Vec data;
    Vec occupancy;
    Vec bandwidth;
    Vec cpu;
    Vec hash;

    Vec flatten() const;
    static std::size_t flat_dim(std::size_t n, std::size_t g) { return n + 2 * n * g + 2 * n; }
};

// U = exp(1 - (T_learn + T_cons + T_mine)/tau) - 1.
double reward(double t_learn, double t_cons, double t_mine, double tau);

// Total projection onto the feasible set: clamps continuous values into
// (1e-6 * cap, cap], resolves (es, channel) slot collisions by lowest-index
// preemption (losers fall back to local), and rescales learn-side parameters
// until the per-MD energy budget holds.  Idempotent.
ParamAction project_action(const ParamAction& raw, const SystemParams& params);

// Returns human-readable violations of the feasibility constraints; empty
// for any output of project_action.
std::vector<std::string> check_constraints(const ParamAction& action, const SystemParams& params);

struct StepResult {
    SystemState state;
    double reward = 0.0;
    latency::Breakdown info;
    ParamAction effective;  // the executed action after in-step energy guards
    std::vector<std::string> violations;  // independent checker output
};

// Single-agent MDP over the latency model.  Deterministic per
// (seed, episode, t); channel fades are resampled from the seeded stream on
// every step.
class BflEnv {
public:
    BflEnv(SystemParams params, EnvConfig cfg);

    const SystemParams& params() const { return params_; }
    const EnvConfig& config() const { return cfg_; }
    double tau() const { return tau_; }

    SystemState reset(std::uint64_t episode);
    SystemState observe() const { return state_; }

    // Channel gain between MD n and ES m on sub-channel g at the current step.
    double gain(std::size_t n, std::size_t m, std::size_t g) const;

    StepResult step(const ParamAction& action);

    // Latency of a full round under `action` with the current gains.
    latency::Breakdown evaluate(const ParamAction& action) const;

    std::size_t timestep() const { return t_; }

private:
    void resample_gains();

    SystemParams params_;
    EnvConfig cfg_;
    double tau_ = 0.0;
    std::uint64_t episode_ = 0;
    std::size_t t_ = 0;
    SystemState state_;
    std::vector<double> base_gain_;  // per (n, m): pathloss component
    std::vector<double> fade_;       // per (n, m, g): per-step fading
};

}  // namespace bflsim::env
