#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/trpo.hpp"
#include "oracles.hpp"

using namespace bflsim;
using namespace bflsim::drl;

namespace {

SystemParams tiny_params() {
    SystemParams p;
    p.num_md = 2;
    p.num_es = 1;
    p.channels = 2;
    p.seed = 5;
    p.finalize();
    return p;
}

Trajectory sample_traj(const PolicyNets& nets, std::size_t steps, Rng& rng) {
    Trajectory traj;
    for (std::size_t t = 0; t < steps; ++t) {
        Vec obs(nets.obs_dim());
        for (auto& v : obs) v = rng.uniform(-1.0, 1.0);
        const auto s = nets.sample_action(obs, rng);
        SampledStep step;
        step.obs = obs;
        step.choices = s.choices;
        step.cont = s.cont;
        step.logp_old = s.logp;
        step.advantage = rng.normal();
        traj.push_back(std::move(step));
    }
    return traj;
}

}  // namespace

TEST_CASE("advantage") {
    CHECK(advantage(1.0, 0.9, 1.0, 2.0) == doctest::Approx(1.8));
    CHECK(advantage(1.0, 0.9, 1.0, 0.0) == doctest::Approx(0.0));  // terminal
    CHECK(advantage(2.0, 0.0, 0.5, 7.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS((void)advantage(std::nan(""), 0.9, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("surrogate_objective: ratio-one and zero-advantage cases") {
    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(20);
    Trajectory traj = sample_traj(nets, 5, rng);

    double mean_adv = 0.0;
    for (const auto& s : traj) mean_adv += s.advantage / 5.0;
    CHECK(surrogate_objective(nets, traj).value == doctest::Approx(mean_adv).epsilon(1e-9));

    Trajectory zero = traj;
    for (auto& s : zero) s.advantage = 0.0;
    CHECK(surrogate_objective(nets, zero).value == doctest::Approx(0.0));

    // Single transition with a known ratio: shift logp_old by -ln 2 so the
    // ratio is exactly 2.
    Trajectory single = {traj[0]};
    single[0].advantage = 0.5;
    single[0].logp_old = nets.log_prob(single[0]) - std::log(2.0);
    CHECK(surrogate_objective(nets, single).value == doctest::Approx(1.0).epsilon(1e-9));

    // Overflowing ratios clamp and flag.
    Trajectory wild = {traj[0]};
    wild[0].logp_old = nets.log_prob(wild[0]) - 50.0;
    const auto res = surrogate_objective(nets, wild);
    CHECK(res.clamped);
    CHECK(std::isfinite(res.value));
}

TEST_CASE("hvp: quadratic fixture with known Hessian") {
    // f(theta) = 1/2 theta^T H theta, H = diag(1, 2); grad = H theta.
    auto grad_fn = [](const Vec& th) { return Vec{th[0], 2.0 * th[1]}; };
    const Vec theta = {0.3, -0.4};

    CHECK(norm2(hvp(grad_fn, theta, {0.0, 0.0}, 1e-5, 0.0)) == 0.0);

    const Vec out = hvp(grad_fn, theta, {1.0, 1.0}, 1e-5, 0.0);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-6));

    // Linearity on the quadratic fixture.
    const Vec v1 = {0.5, -0.25};
    const Vec v2 = {-1.0, 2.0};
    const Vec sum = hvp(grad_fn, theta, add(v1, v2), 1e-5, 0.0);
    const Vec split = add(hvp(grad_fn, theta, v1, 1e-5, 0.0), hvp(grad_fn, theta, v2, 1e-5, 0.0));
    CHECK(oracles::max_rel_error(sum, split) < 1e-5);

    // Damping adds c * v.
    const Vec damped = hvp(grad_fn, theta, {1.0, 1.0}, 1e-5, 0.1);
    CHECK(damped[0] == doctest::Approx(1.1).epsilon(1e-6));
}

TEST_CASE("conjugate_gradient: identity, diagonal, zero") {
    auto identity = [](const Vec& v) { return v; };
    const Vec g = {3.0, -1.0, 0.5};
    const Vec x = conjugate_gradient(identity, g, 10, 1e-12);
    CHECK(oracles::max_rel_error(x, g) < 1e-12);

    auto diag = [](const Vec& v) { return Vec{2.0 * v[0], 4.0 * v[1]}; };
    const Vec sol = conjugate_gradient(diag, {2.0, 4.0}, 10, 1e-12);
    CHECK(sol[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol[1] == doctest::Approx(1.0).epsilon(1e-10));

    CHECK(norm2(conjugate_gradient(identity, {0.0, 0.0}, 10, 1e-12)) == 0.0);
}

TEST_CASE("conjugate_gradient matches a direct solve on SPD fixtures") {
    Rng rng(31);
    for (int it = 0; it < 5; ++it) {
        const std::size_t n = 6;
        Mat a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a.at(i, j) = rng.normal();
        // SPD via A^T A + I.
        Mat spd = matmul(transpose(a), a);
        for (std::size_t i = 0; i < n; ++i) spd.at(i, i) += 1.0;
        Vec g(n);
        for (auto& v : g) v = rng.normal();
        auto apply = [&](const Vec& v) { return matvec(spd, v); };
        const Vec cg = conjugate_gradient(apply, g, 50, 1e-14);
        const Vec direct = solve_linear(spd, g);
        CHECK(oracles::max_rel_error(cg, direct) < 1e-8);
    }
}

TEST_CASE("line_search_update: base scale, zero direction, acceptance contract") {
    TrpoConfig cfg;
    cfg.validate();
    // Base scale example: eps = 0.01, nu^T H nu = 2 -> sqrt(0.02 / 2) = 0.1.
    CHECK(std::sqrt(2.0 * cfg.eps_kl / 2.0) == doctest::Approx(0.1));

    const auto p = tiny_params();
    PolicyNets nets(6, p, 3);
    Rng rng(40);
    Trajectory traj = sample_traj(nets, 6, rng);
    const DistCache cache = nets.dist_cache(traj);
    auto hvp_fn = [](const Vec& v) { return v; };  // identity curvature

    const Vec zero(nets.param_count(), 0.0);
    const auto rej = line_search_update(nets, zero, hvp_fn, traj, cache, cfg);
    CHECK_FALSE(rej.accepted);
    CHECK(rej.theta == nets.theta());

    // A genuine ascent direction: the policy gradient itself.
    Vec g(nets.param_count(), 0.0);
    for (const auto& s : traj) nets.log_prob_grad(s, s.advantage / 6.0, g);
    const auto res = line_search_update(nets, g, hvp_fn, traj, cache, cfg);
    if (res.accepted) {
        CHECK(res.kl <= cfg.eps_kl + 1e-6);
        nets.set_theta(res.theta);
        double mean_adv = 0.0;
        for (const auto& s : traj) mean_adv += s.advantage / 6.0;
        CHECK(res.surrogate > mean_adv);
        CHECK(nets.kl(cache, traj) == doctest::Approx(res.kl).epsilon(1e-12));
    }
}
