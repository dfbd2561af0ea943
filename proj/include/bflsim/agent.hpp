#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bflsim/critic.hpp"
#include "bflsim/env.hpp"
#include "bflsim/policy.hpp"
#include "bflsim/trpo.hpp"

namespace bflsim::drl {

struct EpisodeRow {
    std::size_t episode = 0;
    double mean_reward = 0.0;
    double kl = 0.0;
    double surrogate = 0.0;
    std::size_t backtracks = 0;
    double critic_loss = 0.0;
    bool accepted = false;
};

struct EvalTraceRow {
    std::size_t episode = 0;
    std::size_t t = 0;
    double reward = 0.0;
    double t_learn = 0.0;
    double t_cons = 0.0;
    double t_mine = 0.0;
    std::size_t violations = 0;
};

// Advantage actor-critic with a trust-region actor update; one actor update
// per rolled episode, per-transition critic TD updates.
class Agent {
public:
    Agent(const SystemParams& params, const TrpoConfig& cfg, std::uint64_t init_seed);

    const PolicyNets& policy() const { return policy_; }
    PolicyNets& policy() { return policy_; }
    const Critic& critic() const { return critic_; }
    const TrpoConfig& config() const { return cfg_; }

    std::vector<EpisodeRow> train(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                                  std::uint64_t seed);

    // Mean per-step reward over evaluation episodes (deterministic policy).
    double evaluate(env::BflEnv& env, std::size_t episodes, std::size_t steps, std::uint64_t seed,
                    std::vector<EvalTraceRow>* trace = nullptr) const;

    void save(const std::string& path) const;
    static Agent load(const std::string& path, const SystemParams& params, const TrpoConfig& cfg);

private:
    Trajectory rollout(env::BflEnv& env, std::size_t episode, std::size_t steps,
                       std::uint64_t seed, bool deterministic,
                       std::vector<EvalTraceRow>* trace) const;

    PolicyNets policy_;
    Critic critic_;
    TrpoConfig cfg_;
    ObsScaler scaler_;
};

// Uniform-random feasible action: uniform discrete choice, continuous values
// uniform in (0, cap].
ParamAction random_action(const SystemParams& params, Rng& rng);

// Per-MD myopic rule at max caps: offload over the best free slot when the
// projected offload latency beats the local latency, otherwise local.
ParamAction greedy_action(const env::BflEnv& env);

// Mean per-step reward of an action source over seeded episodes.
double evaluate_random_policy(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                              std::uint64_t seed);
double evaluate_greedy_policy(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                              std::uint64_t seed);

}  // namespace bflsim::drl
