#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/env.hpp"
#include "bflsim/rng.hpp"

using namespace bflsim;
using namespace bflsim::env;

namespace {

SystemParams toy_params(std::size_t n = 2, std::size_t m = 1, std::size_t g = 3) {
    SystemParams p;
    p.num_md = n;
    p.num_es = m;
    p.channels = g;
    p.seed = 11;
    p.finalize();
    return p;
}

ParamAction all_local(const SystemParams& p) {
    ParamAction a(p.num_md);
    for (std::size_t n = 0; n < p.num_md; ++n) {
        a[n].choice = 0;
        a[n].cpu_hz = p.md_max_cpu_hz[n];
        a[n].hash_rate = p.hash_cap;
    }
    return project_action(a, p);
}

}  // namespace

TEST_CASE("reward: exact exponential utility") {
    CHECK(reward(1.0, 0.0, 0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reward(0.0, 0.0, 0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(reward(2.0, 0.0, 0.0, 1.0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)reward(1.0, 0.0, 0.0, 0.0), std::invalid_argument);

    // Strictly decreasing in every component, bounded in (-1, e-1].
    double prev = 10.0;
    for (double t : {0.0, 0.5, 1.0, 5.0, 50.0}) {
        const double u = reward(t, 0.1, 0.1, 3.0);
        CHECK(u < prev);
        CHECK(u > -1.0);
        CHECK(u <= std::exp(1.0) - 1.0);
        prev = u;
    }
}

TEST_CASE("observe: dimension layout and stability") {
    auto p = toy_params(2, 1, 3);
    BflEnv env(p, EnvConfig{});
    const auto s = env.observe();
    CHECK(s.flatten().size() == 18);  // 2 + 6 + 6 + 2 + 2
    CHECK(SystemState::flat_dim(2, 3) == 18);

    const auto again = env.observe();
    CHECK(s.flatten() == again.flatten());
}

TEST_CASE("step flips the matching occupancy bit") {
    auto p = toy_params(2, 1, 3);
    BflEnv env(p, EnvConfig{});
    ParamAction a = all_local(p);
    a[1].choice = 2;  // es 0, channel 1
    a[1].power_w = 0.3;
    a[1].bandwidth_hz = 1e6;
    a[1].cpu_hz = 0.0;
    a = project_action(a, p);
    const auto res = env.step(a);
    CHECK(res.violations.empty());
    const std::size_t g = p.channels;
    CHECK(res.state.occupancy[1 * g + 1] == 1.0);
    CHECK(res.state.occupancy[1 * g + 0] == 0.0);
    CHECK(res.state.occupancy[0 * g + 0] == 0.0);
    CHECK(res.state.bandwidth[1 * g + 1] == doctest::Approx(1e6));
}

TEST_CASE("project_action: clamps") {
    auto p = toy_params(1, 1, 1);
    ParamAction raw(1);
    raw[0].choice = 1;
    raw[0].power_w = 2.0 * p.md_max_power_w[0];
    raw[0].bandwidth_hz = -5.0;
    raw[0].hash_rate = p.hash_cap * 10.0;
    const auto out = project_action(raw, p);
    CHECK(out[0].power_w == doctest::Approx(p.md_max_power_w[0]));
    CHECK(out[0].bandwidth_hz == doctest::Approx(1e-6 * p.max_bandwidth_hz));
    CHECK(out[0].hash_rate == doctest::Approx(p.hash_cap));

    ParamAction neg(1);
    neg[0].choice = 1;
    neg[0].power_w = -1.0;
    neg[0].bandwidth_hz = 1e6;
    neg[0].hash_rate = 1e9;
    const auto lo = project_action(neg, p);
    CHECK(lo[0].power_w == doctest::Approx(1e-6 * p.md_max_power_w[0]));
    CHECK(lo[0].power_w > 0.0);
}

TEST_CASE("project_action: slot preemption, lowest index wins") {
    auto p = toy_params(4, 1, 3);
    ParamAction raw(4);
    for (std::size_t n = 0; n < 4; ++n) {
        raw[n].choice = (n % 3) + 1;  // md3 collides with md0 on channel 0
        raw[n].power_w = 0.1;
        raw[n].bandwidth_hz = 1e6;
        raw[n].cpu_hz = 1e9;
        raw[n].hash_rate = 1e11;
    }
    const auto out = project_action(raw, p);
    CHECK(out[0].offloads());
    CHECK(out[1].offloads());
    CHECK(out[2].offloads());
    CHECK_FALSE(out[3].offloads());  // fell back to local
    CHECK(out[3].cpu_hz > 0.0);
    CHECK(check_constraints(out, p).empty());
}

TEST_CASE("project_action: idempotent and always feasible") {
    auto p = toy_params(3, 2, 2);
    Rng rng(17);
    for (int it = 0; it < 200; ++it) {
        ParamAction raw(3);
        for (auto& a : raw) {
            a.choice = rng.uniform_u64(0, 8);  // out-of-range values demote to local
            a.power_w = rng.uniform(-1.0, 2.0);
            a.bandwidth_hz = rng.uniform(-1e6, 4e7);
            a.cpu_hz = rng.uniform(-1e9, 4e9);
            a.hash_rate = rng.uniform(-1e11, 3e12);
        }
        const auto once = project_action(raw, p);
        CHECK(check_constraints(once, p).empty());
        const auto twice = project_action(once, p);
        for (std::size_t n = 0; n < 3; ++n) {
            CHECK(twice[n].choice == once[n].choice);
            CHECK(twice[n].power_w == once[n].power_w);
            CHECK(twice[n].bandwidth_hz == once[n].bandwidth_hz);
            CHECK(twice[n].cpu_hz == once[n].cpu_hz);
            CHECK(twice[n].hash_rate == once[n].hash_rate);
        }
    }
}

TEST_CASE("project_action: energy budget caps local cpu") {
    auto p = toy_params(1, 1, 1);
    p.md_energy_budget_j = {2600.0};  // e_gen = 2500 J leaves 100 J for training
    ParamAction raw(1);
    raw[0].choice = 0;
    raw[0].cpu_hz = p.md_max_cpu_hz[0];
    raw[0].hash_rate = 1e11;
    const auto out = project_action(raw, p);
    const double e_loc = latency::energy_local(p.kappa, out[0].cpu_hz, p.md_cycles_per_point[0]);
    CHECK(e_loc <= 100.0 * (1.0 + 1e-9));
    CHECK(check_constraints(out, p).empty());
}

TEST_CASE("step: reward composes the latency oracle totals") {
    auto p = toy_params(2, 2, 2);
    EnvConfig cfg;
    cfg.tau = 20.0;
    BflEnv env(p, cfg);
    env.reset(3);
    const auto action = all_local(p);
    const auto info = env.evaluate(action);
    const auto res = env.step(action);
    CHECK(res.reward ==
          doctest::Approx(reward(info.t_learn, info.t_cons, info.t_mine, 20.0)).epsilon(1e-12));

    // tau -> infinity pushes the reward to e - 1 from below.
    EnvConfig wide;
    wide.tau = 1e9;
    BflEnv env2(p, wide);
    const auto r2 = env2.step(action);
    CHECK(r2.reward < std::exp(1.0) - 1.0);
    CHECK(r2.reward == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-6));
}

TEST_CASE("step: deterministic per (seed, episode, t)") {
    auto p = toy_params(2, 2, 2);
    BflEnv a(p, EnvConfig{});
    BflEnv b(p, EnvConfig{});
    a.reset(5);
    b.reset(5);
    const auto action = all_local(p);
    const auto ra = a.step(action);
    const auto rb = b.step(action);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.info.t_learn == rb.info.t_learn);
    CHECK(ra.state.flatten() == rb.state.flatten());
}

TEST_CASE("discounted return bound") {
    auto p = toy_params(2, 1, 2);
    EnvConfig cfg;
    cfg.gamma = 0.9;
    BflEnv env(p, cfg);
    env.reset(0);
    const auto action = all_local(p);
    double ret = 0.0;
    double g = 1.0;
    for (int t = 0; t < 50; ++t) {
        ret += g * env.step(action).reward;
        g *= cfg.gamma;
    }
    CHECK(std::fabs(ret) <= (std::exp(1.0) - 1.0) / (1.0 - cfg.gamma));
}
