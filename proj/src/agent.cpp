#include "bflsim/agent.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bflsim::drl {

Agent::Agent(const SystemParams& params, const TrpoConfig& cfg, std::uint64_t init_seed)
    : policy_(env::SystemState::flat_dim(params.num_md, params.channels), params, init_seed),
      critic_(Critic::make_mlp(env::SystemState::flat_dim(params.num_md, params.channels),
                               init_seed + 1)),
      cfg_(cfg),
      scaler_(ObsScaler::for_params(params)) {
    cfg_.validate();
}

Trajectory Agent::rollout(env::BflEnv& env, std::size_t episode, std::size_t steps,
                          std::uint64_t seed, bool deterministic,
                          std::vector<EvalTraceRow>* trace) const {
    Trajectory traj;
    traj.reserve(steps);
    env.reset(episode);
    Vec obs = scaler_.apply(env.observe().flatten());
    for (std::size_t t = 0; t < steps; ++t) {
        Rng rng = Rng::stream(seed, episode, t, "rl-sample");
        const auto sample = policy_.sample_action(obs, rng, deterministic);
        const ParamAction action =
            env::project_action(policy_.to_param_action(sample), env.params());
        const auto step = env.step(action);

        SampledStep rec;
        rec.obs = obs;
        rec.choices = sample.choices;
        rec.cont = sample.cont;
        rec.reward = step.reward;
        rec.logp_old = sample.logp;
        traj.push_back(std::move(rec));

        if (trace) {
            EvalTraceRow row;
            row.episode = episode;
            row.t = t;
            row.reward = step.reward;
            row.t_learn = step.info.t_learn;
            row.t_cons = step.info.t_cons;
            row.t_mine = step.info.t_mine;
            row.violations = step.violations.size();
            trace->push_back(row);
        }
        obs = scaler_.apply(step.state.flatten());
    }
    return traj;
}

std::vector<EpisodeRow> Agent::train(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                                     std::uint64_t seed) {
    std::vector<EpisodeRow> rows;
    rows.reserve(episodes);
    const double gamma = env.config().gamma;

    for (std::size_t ep = 0; ep < episodes; ++ep) {
        Trajectory traj = rollout(env, ep, steps, seed, false, nullptr);

        // Value estimates and advantages; the episode end is terminal.
        for (std::size_t t = 0; t < traj.size(); ++t) {
            traj[t].v_s = critic_.value(traj[t].obs);
            traj[t].v_next = (t + 1 < traj.size()) ? critic_.value(traj[t + 1].obs) : 0.0;
            traj[t].advantage = advantage(traj[t].reward, gamma, traj[t].v_s, traj[t].v_next);
        }

        // Policy gradient at the pre-update parameters.
        Vec g(policy_.param_count(), 0.0);
        for (const auto& step : traj)
            policy_.log_prob_grad(step, step.advantage / static_cast<double>(traj.size()), g);

        const Vec theta_old = policy_.theta();
        const DistCache old_cache = policy_.dist_cache(traj);

        auto kl_grad_at = [&](const Vec& theta) {
            policy_.set_theta(theta);
            Vec kg = policy_.kl_grad(old_cache, traj);
            return kg;
        };
        auto hvp_fn = [&](const Vec& v) {
            Vec out = hvp(kl_grad_at, theta_old, v, cfg_.hvp_eps, cfg_.damping);
            policy_.set_theta(theta_old);
            return out;
        };

        const Vec direction = conjugate_gradient(hvp_fn, g, cfg_.cg_iters, cfg_.cg_tol);
        const LineSearchResult ls =
            line_search_update(policy_, direction, hvp_fn, traj, old_cache, cfg_);
        policy_.set_theta(ls.theta);

        // Critic TD updates with the advantages computed before the update.
        double critic_loss = 0.0;
        for (const auto& step : traj) {
            critic_.td_update(step.advantage, step.obs, cfg_.critic_rate);
            critic_loss += step.advantage * step.advantage;
        }
        critic_loss /= static_cast<double>(traj.size());

        EpisodeRow row;
        row.episode = ep;
        for (const auto& step : traj) row.mean_reward += step.reward;
        row.mean_reward /= static_cast<double>(traj.size());
        row.kl = ls.kl;
        row.surrogate = ls.surrogate;
        row.backtracks = ls.backtracks;
        row.accepted = ls.accepted;
        row.critic_loss = critic_loss;
        rows.push_back(row);

        if (!all_finite(policy_.theta()) || !all_finite(critic_.params()))
            throw std::runtime_error("Agent::train: non-finite parameters at episode " +
                                     std::to_string(ep));
    }
    return rows;
}

double Agent::evaluate(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                       std::uint64_t seed, std::vector<EvalTraceRow>* trace) const {
    double total = 0.0;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        const Trajectory traj = rollout(env, ep, steps, seed, true, trace);
        for (const auto& s : traj) total += s.reward;
    }
    return total / static_cast<double>(episodes * steps);
}

namespace {
constexpr char kMagic[8] = {'B', 'F', 'L', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
}  // namespace

void Agent::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("Agent::save: cannot open " + path);
    out.write(kMagic, 8);
    write_u64(out, policy_.obs_dim());
    write_u64(out, policy_.num_md());
    write_u64(out, policy_.num_choices());
    write_u64(out, policy_.theta().size());
    write_u64(out, critic_.params().size());
    out.write(reinterpret_cast<const char*>(policy_.theta().data()),
              static_cast<std::streamsize>(8 * policy_.theta().size()));
    out.write(reinterpret_cast<const char*>(critic_.params().data()),
              static_cast<std::streamsize>(8 * critic_.params().size()));
}

Agent Agent::load(const std::string& path, const SystemParams& params, const TrpoConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("Agent::load: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("Agent::load: bad checkpoint header");
    Agent agent(params, cfg, 0);
    const std::uint64_t obs_dim = read_u64(in);
    const std::uint64_t num_md = read_u64(in);
    const std::uint64_t num_choices = read_u64(in);
    const std::uint64_t theta_size = read_u64(in);
    const std::uint64_t critic_size = read_u64(in);
    if (obs_dim != agent.policy_.obs_dim() || num_md != agent.policy_.num_md() ||
        num_choices != agent.policy_.num_choices() ||
        theta_size != agent.policy_.theta().size() ||
        critic_size != agent.critic_.params().size())
        throw std::runtime_error("Agent::load: checkpoint layout does not match the scenario");
    Vec theta(theta_size), cparams(critic_size);
    in.read(reinterpret_cast<char*>(theta.data()), static_cast<std::streamsize>(8 * theta_size));
    in.read(reinterpret_cast<char*>(cparams.data()), static_cast<std::streamsize>(8 * critic_size));
    if (!in) throw std::runtime_error("Agent::load: truncated checkpoint");
    agent.policy_.set_theta(theta);
    agent.critic_.set_params(cparams);
    return agent;
}

ParamAction random_action(const SystemParams& params, Rng& rng) {
    ParamAction a(params.num_md);
    for (std::size_t n = 0; n < params.num_md; ++n) {
        a[n].choice = rng.uniform_u64(0, params.discrete_actions() - 1);
        a[n].power_w = rng.uniform01() * params.md_max_power_w[n];
        a[n].bandwidth_hz = rng.uniform01() * params.max_bandwidth_hz;
        a[n].cpu_hz = rng.uniform01() * params.md_max_cpu_hz[n];
        a[n].hash_rate = rng.uniform01() * params.hash_cap;
    }
    return env::project_action(a, params);
}

ParamAction greedy_action(const env::BflEnv& env) {
    const SystemParams& p = env.params();
    ParamAction a(p.num_md);
    std::vector<bool> slot_taken(p.num_es * p.channels, false);
    const double e_gen = latency::energy_mine(p.joules_per_hash, p.hash_work);

    for (std::size_t n = 0; n < p.num_md; ++n) {
        // Local option at the largest budget-feasible cpu.
        const double budget = p.md_energy_budget_j[n] - e_gen;
        const double f_fit = std::sqrt(budget / (p.kappa * p.md_cycles_per_point[n]));
        const double f = std::min(p.md_max_cpu_hz[n], f_fit);
        const double t_local = latency::local_latency(p.md_cycles_per_point[n],
                                                      p.md_data_points[n], p.batch_ratio,
                                                      p.md_epochs, f);

        // Best free slot by channel gain, offloading at max power and an even
        // bandwidth share (interference ignored; this is a myopic estimate).
        double best_t_off = -1.0;
        std::size_t best_slot = 0;
        for (std::size_t m = 0; m < p.num_es; ++m)
            for (std::size_t g = 0; g < p.channels; ++g) {
                const std::size_t slot = m * p.channels + g;
                if (slot_taken[slot]) continue;
                const double band = p.max_bandwidth_hz / static_cast<double>(p.channels);
                const double rate = latency::transmission_rate(
                    band, p.md_max_power_w[n], env.gain(n, m, g), p.noise_w, 0.0);
                if (!(rate > 0.0)) continue;
                const double t_off = p.md_data_bits(n) / rate +
                                     latency::exec_latency(p.es_cycles_per_point,
                                                           p.md_data_points[n], p.batch_ratio,
                                                           p.es_epochs, p.es_cpu_hz);
                if (best_t_off < 0.0 || t_off < best_t_off) {
                    best_t_off = t_off;
                    best_slot = slot;
                }
            }

        if (best_t_off >= 0.0 && best_t_off < t_local) {
            a[n].choice = best_slot + 1;
            a[n].power_w = p.md_max_power_w[n];
            a[n].bandwidth_hz = p.max_bandwidth_hz / static_cast<double>(p.channels);
            slot_taken[best_slot] = true;
        } else {
            a[n].choice = 0;
            a[n].cpu_hz = p.md_max_cpu_hz[n];
        }
        a[n].hash_rate = p.hash_cap;
    }
    return env::project_action(a, p);
}

namespace {

template <typename ActionFn>
double evaluate_action_source(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                              ActionFn&& fn) {
    double total = 0.0;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        env.reset(ep);
        for (std::size_t t = 0; t < steps; ++t) total += env.step(fn(ep, t)).reward;
    }
    return total / static_cast<double>(episodes * steps);
}

}  // namespace

double evaluate_random_policy(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                              std::uint64_t seed) {
    return evaluate_action_source(env, episodes, steps, [&](std::size_t ep, std::size_t t) {
        Rng rng = Rng::stream(seed, ep, t, "random-policy");
        return random_action(env.params(), rng);
    });
}

double evaluate_greedy_policy(env::BflEnv& env, std::size_t episodes, std::size_t steps,
                              std::uint64_t seed) {
    (void)seed;
    return evaluate_action_source(env, episodes, steps,
                                  [&](std::size_t, std::size_t) { return greedy_action(env); });
}

}  // namespace bflsim::drl
