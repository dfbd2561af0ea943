#include "bflsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bflsim/rng.hpp"

namespace bflsim::env {

Vec SystemState::flatten() const {
    Vec out;
    out.reserve(data.size() + occupancy.size() + bandwidth.size() + cpu.size() + hash.size());
    auto app = [&out](const Vec& v) { out.insert(out.end(), v.begin(), v.end()); };
    app(data);
    app(occupancy);
    app(bandwidth);
    app(cpu);
    app(hash);
    return out;
}

double reward(double t_learn, double t_cons, double t_mine, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("reward: tau > 0 required");
    return std::exp(1.0 - (t_learn + t_cons + t_mine) / tau) - 1.0;
}

namespace {

constexpr double kLowerClampRatio = 1e-6;

double clamp_cap(double raw, double cap) {
    const double lo = kLowerClampRatio * cap;
    if (!(raw > lo)) return lo;
    return std::min(raw, cap);
}

}  // namespace

ParamAction project_action(const ParamAction& raw, const SystemParams& params) {
    if (raw.size() != params.num_md)
        throw std::invalid_argument("project_action: one entry per MD required");
    const std::size_t slots = params.num_es * params.channels;
    std::vector<bool> slot_taken(slots, false);

    ParamAction out(params.num_md);
    const double e_gen = latency::energy_mine(params.joules_per_hash, params.hash_work);

    for (std::size_t n = 0; n < params.num_md; ++n) {
        MdAction a;
        a.choice = raw[n].choice <= slots ? raw[n].choice : 0;

        // Slot preemption: lowest MD index keeps a contested (es, channel)
        // pair, later claimants fall back to local execution.
        if (a.choice != 0) {
            const std::size_t slot = a.choice - 1;
            if (slot_taken[slot])
                a.choice = 0;
            else
                slot_taken[slot] = true;
        }

        a.hash_rate = clamp_cap(raw[n].hash_rate, params.hash_cap);
        if (a.choice != 0) {
            a.power_w = clamp_cap(raw[n].power_w, params.md_max_power_w[n]);
            a.bandwidth_hz = clamp_cap(raw[n].bandwidth_hz, params.max_bandwidth_hz);
            a.cpu_hz = 0.0;
        } else {
            a.cpu_hz = clamp_cap(raw[n].cpu_hz, params.md_max_cpu_hz[n]);
            a.power_w = 0.0;
            a.bandwidth_hz = 0.0;
            // Local training energy kappa * f^2 * C must fit the budget left
            // after the fixed block-generation energy.
            const double budget = params.md_energy_budget_j[n] - e_gen;
            const double e_loc = latency::energy_local(params.kappa, a.cpu_hz,
                                                       params.md_cycles_per_point[n]);
            if (e_loc > budget) {
                const double f_max = std::sqrt(budget / (params.kappa * params.md_cycles_per_point[n]));
                a.cpu_hz = std::max(kLowerClampRatio * params.md_max_cpu_hz[n],
                                    std::min(a.cpu_hz, f_max));
            }
        }
        out[n] = a;
    }
    return out;
}

std::vector<std::string> check_constraints(const ParamAction& action, const SystemParams& params) {
    std::vector<std::string> out;
    if (action.size() != params.num_md) {
        out.push_back("action size != N");
        return out;
    }
    const std::size_t slots = params.num_es * params.channels;
    std::vector<int> slot_count(slots, 0);
    const double e_gen = latency::energy_mine(params.joules_per_hash, params.hash_work);

    for (std::size_t n = 0; n < params.num_md; ++n) {
        const MdAction& a = action[n];
        const std::string tag = "md" + std::to_string(n) + ": ";
        if (a.choice > slots) out.push_back(tag + "offload target out of range");
        if (!(a.hash_rate > 0.0) || a.hash_rate > params.hash_cap)
            out.push_back(tag + "hash rate outside (0, cap]");
        if (a.offloads()) {
            ++slot_count[a.choice - 1];
            if (!(a.power_w > 0.0) || a.power_w > params.md_max_power_w[n])
                out.push_back(tag + "transmit power outside (0, P_n]");
            if (!(a.bandwidth_hz > 0.0) || a.bandwidth_hz > params.max_bandwidth_hz)
                out.push_back(tag + "bandwidth outside (0, W]");
        } else {
            if (!(a.cpu_hz > 0.0) || a.cpu_hz > params.md_max_cpu_hz[n])
                out.push_back(tag + "cpu outside (0, F_n]");
            const double e_loc =
                latency::energy_local(params.kappa, a.cpu_hz, params.md_cycles_per_point[n]);
            if (e_loc + e_gen > params.md_energy_budget_j[n] * (1.0 + 1e-12))
                out.push_back(tag + "energy budget exceeded");
        }
    }
    for (std::size_t s = 0; s < slots; ++s)
        if (slot_count[s] > 1)
            out.push_back("slot es" + std::to_string(s / params.channels) + "/g" +
                          std::to_string(s % params.channels) + " assigned to multiple MDs");
    return out;
}

BflEnv::BflEnv(SystemParams params, EnvConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    params_.finalize();
    params_.validate();
    tau_ = cfg_.tau > 0.0 ? cfg_.tau : 3.0 * static_cast<double>(params_.num_md);

    // Static geometry: ESs on a circle, MDs scattered around their parent ES.
    base_gain_.assign(params_.num_md * params_.num_es, 0.0);
    std::vector<std::pair<double, double>> es_pos(params_.num_es);
    for (std::size_t m = 0; m < params_.num_es; ++m) {
        const double ang = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(params_.num_es);
        es_pos[m] = {params_.cell_radius_m * std::cos(ang), params_.cell_radius_m * std::sin(ang)};
    }
    for (std::size_t n = 0; n < params_.num_md; ++n) {
        Rng rng = Rng::stream(params_.seed, n, 0, "md-position");
        const auto [px, py] = es_pos[params_.md_parent_es(n)];
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double dist = rng.uniform(10.0, 0.5 * params_.cell_radius_m);
        const double x = px + dist * std::cos(ang);
        const double y = py + dist * std::sin(ang);
        for (std::size_t m = 0; m < params_.num_es; ++m) {
            const double dx = x - es_pos[m].first;
            const double dy = y - es_pos[m].second;
            const double d = std::max(params_.ref_distance_m, std::sqrt(dx * dx + dy * dy));
            base_gain_[n * params_.num_es + m] =
                params_.gain_ref * std::pow(params_.ref_distance_m / d, params_.pathloss_exp);
        }
    }
    reset(0);
}

SystemState BflEnv::reset(std::uint64_t episode) {
    episode_ = episode;
    t_ = 0;
    const std::size_t n = params_.num_md;
    const std::size_t g = params_.channels;
    state_.data = params_.md_data_points;
    state_.occupancy.assign(n * g, 0.0);
    state_.bandwidth.assign(n * g, 0.0);
    state_.cpu = params_.md_max_cpu_hz;
    state_.hash.assign(n, params_.hash_cap);
    resample_gains();
    return state_;
}

void BflEnv::resample_gains() {
    const std::size_t n = params_.num_md;
    const std::size_t m = params_.num_es;
    const std::size_t g = params_.channels;
    fade_.assign(n * m * g, 1.0);
    Rng rng = Rng::stream(params_.seed, episode_, t_, "channel-fade");
    for (auto& f : fade_) f = rng.exponential(1.0);
}

double BflEnv::gain(std::size_t n, std::size_t m, std::size_t g) const {
    return base_gain_[n * params_.num_es + m] *
           fade_[(n * params_.num_es + m) * params_.channels + g];
}

latency::Breakdown BflEnv::evaluate(const ParamAction& action) const {
    const std::size_t nmd = params_.num_md;
    const std::size_t nes = params_.num_es;
    latency::Breakdown b;
    b.t_off.assign(nmd, 0.0);
    b.t_exe.assign(nes, 0.0);
    b.t_loc.assign(nmd, 0.0);
    b.t_up.assign(nmd, 0.0);
    b.t_mine_md.assign(nmd, 0.0);
    b.e_off.assign(nmd, 0.0);
    b.e_loc.assign(nmd, 0.0);
    b.e_gen.assign(nmd, 0.0);

    // Interference at ES m on sub-channel g comes from MDs offloading to
    // *other* ESs over the same sub-channel.
    auto interference_at = [&](std::size_t es, std::size_t ch, std::size_t self) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nmd; ++j) {
            if (j == self || !action[j].offloads()) continue;
            if (action[j].channel(params_.channels) != ch) continue;
            if (action[j].target_es(params_.channels) == es) continue;
            acc += action[j].power_w * gain(j, es, ch);
        }
        return acc;
    };

    std::vector<double> es_points(nes, 0.0);
    for (std::size_t n = 0; n < nmd; ++n) {
        const MdAction& a = action[n];
        if (a.offloads()) {
            const std::size_t es = a.target_es(params_.channels);
            const std::size_t ch = a.channel(params_.channels);
            const double rate =
                latency::transmission_rate(a.bandwidth_hz, a.power_w, gain(n, es, ch),
                                           params_.noise_w, interference_at(es, ch, n));
            b.t_off[n] = latency::offload_latency(params_.md_data_bits(n), rate);
            b.e_off[n] = latency::energy_offload(a.power_w, b.t_off[n]);
            es_points[es] += params_.md_data_points[n];
        } else {
            b.t_loc[n] = latency::local_latency(params_.md_cycles_per_point[n],
                                                params_.md_data_points[n], params_.batch_ratio,
                                                params_.md_epochs, a.cpu_hz);
            b.e_loc[n] = latency::energy_local(params_.kappa, a.cpu_hz,
                                               params_.md_cycles_per_point[n]);
            // Model upload to the parent ES on the default sub-channel at
            // full power; uploads are scheduled outside the offloading epoch
            // so no interference term applies.
            const std::size_t es = params_.md_parent_es(n);
            const std::size_t ch = n % params_.channels;
            const double rate = latency::transmission_rate(
                params_.upload_bandwidth_hz, params_.md_max_power_w[n], gain(n, es, ch),
                params_.noise_w, 0.0);
            b.t_up[n] = latency::upload_latency(params_.model_bits, rate);
        }
        const auto mine =
            latency::mine_latency(params_.hash_work, action[n].hash_rate, params_.verify_coeff,
                                  params_.model_bits, nes, nmd, params_.fork_rate,
                                  params_.tx_count, params_.fork_occurrences,
                                  params_.block_size_slope);
        b.t_mine_md[n] = mine.t_mine;
        b.e_gen[n] = latency::energy_mine(params_.joules_per_hash, params_.hash_work);
    }

    for (std::size_t m = 0; m < nes; ++m) {
        if (es_points[m] > 0.0)
            b.t_exe[m] = latency::exec_latency(params_.es_cycles_per_point, es_points[m],
                                               params_.batch_ratio, params_.es_epochs,
                                               params_.es_cpu_hz);
    }

    for (double v : b.t_off) b.t_learn += v;
    for (double v : b.t_exe) b.t_learn += v;
    for (double v : b.t_loc) b.t_learn += v;
    for (double v : b.t_up) b.t_learn += v;
    for (double v : b.t_mine_md) b.t_mine += v;

    // Consensus over the ES mesh: per round, each ES waits for its slowest
    // neighbor transfer; wired rates carry a per-round multiplicative jitter.
    if (nes > 1) {
        std::vector<std::vector<double>> times(nes);
        Rng rng = Rng::stream(params_.seed, episode_, t_, "wired-jitter");
        for (std::size_t l = 0; l < params_.consensus_phi; ++l) {
            for (std::size_t m = 0; m < nes; ++m) {
                const double rate = params_.wired_rate_bps * rng.uniform(0.75, 1.25);
                times[m].push_back(latency::consensus_round_time(params_.model_bits, {rate}));
            }
        }
        b.t_cons = latency::consensus_latency(times);
    }
    return b;
}

StepResult BflEnv::step(const ParamAction& action) {
    StepResult res;
    ParamAction effective = action;

    // Offload energy depends on the realized channel, so the budget can only
    // be enforced here: an energy-infeasible offload degrades to local
    // execution with a budget-fitting cpu allocation.
    const double e_gen = latency::energy_mine(params_.joules_per_hash, params_.hash_work);
    latency::Breakdown trial = evaluate(effective);
    for (std::size_t n = 0; n < params_.num_md; ++n) {
        if (!effective[n].offloads()) continue;
        if (trial.e_off[n] + e_gen > params_.md_energy_budget_j[n]) {
            effective[n].choice = 0;
            effective[n].power_w = 0.0;
            effective[n].bandwidth_hz = 0.0;
            const double budget = params_.md_energy_budget_j[n] - e_gen;
            effective[n].cpu_hz =
                std::min(params_.md_max_cpu_hz[n],
                         std::sqrt(budget / (params_.kappa * params_.md_cycles_per_point[n])));
            trial = evaluate(effective);
        }
    }

    res.info = trial;
    res.reward = reward(res.info.t_learn, res.info.t_cons, res.info.t_mine, tau_);
    res.effective = effective;
    res.violations = check_constraints(effective, params_);

    // Next state mirrors the executed allocation.
    const std::size_t g = params_.channels;
    state_.occupancy.assign(params_.num_md * g, 0.0);
    state_.bandwidth.assign(params_.num_md * g, 0.0);
    for (std::size_t n = 0; n < params_.num_md; ++n) {
        const MdAction& a = effective[n];
        if (a.offloads()) {
            const std::size_t ch = a.channel(g);
            state_.occupancy[n * g + ch] = 1.0;
            state_.bandwidth[n * g + ch] = a.bandwidth_hz;
            state_.cpu[n] = params_.md_max_cpu_hz[n];
        } else {
            state_.cpu[n] = a.cpu_hz;
        }
        state_.hash[n] = a.hash_rate;
    }
    ++t_;
    resample_gains();
    res.state = state_;
    return res;
}

}  // namespace bflsim::env
